"""Shared fixtures: shipped config paths and cached derivations."""

import json
import os

import pytest

from qqqsim.circuit_model import derive_spin_model, load_circuit_json

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def config_path(name: str) -> str:
    return os.path.join(CONFIG_DIR, name)


def load_config(name: str) -> dict:
    with open(config_path(name)) as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def spin_offresonant():
    return derive_spin_model(load_circuit_json(config_path("circuit_offresonant.json")))


@pytest.fixture(scope="session")
def spin_two_photon():
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return derive_spin_model(load_circuit_json(config_path("circuit_two_photon.json")))


@pytest.fixture(scope="session")
def spin_resonant_swap():
    return derive_spin_model(load_circuit_json(config_path("circuit_resonant_swap.json")))
