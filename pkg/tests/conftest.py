import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))


@pytest.fixture
def clean_env(monkeypatch):
    """No MACBENCH_SEED from the developer's shell"""
    monkeypatch.delenv("MACBENCH_SEED", raising=False)
    return monkeypatch


@pytest.fixture
def config_file(tmp_path):
    """Write a YAML manifest and return its path"""
    def write(text, name="run.yaml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write
