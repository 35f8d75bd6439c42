import runpy
import sys
from pathlib import Path

import pytest

SCRIPTS = sorted((Path(__file__).parent.parent / "scripts").glob("*.py"))


@pytest.mark.parametrize("script", SCRIPTS, ids=lambda p: p.stem)
def test_script_runs(script, tmp_path, monkeypatch):
    monkeypatch.setattr(sys, "argv", [script.name, "--out-dir", str(tmp_path)])
    runpy.run_path(str(script), run_name="__main__")
    outputs = list(tmp_path.glob("*.csv"))
    assert outputs
    for csv in outputs:
        lines = csv.read_text().splitlines()
        assert len(lines) > 2 and "," in lines[0]
