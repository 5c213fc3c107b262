from pathlib import Path

import pytest

pytest.importorskip("streamlit.testing.v1")
from streamlit.testing.v1 import AppTest  # noqa: E402

from utils.config import GridConfig, StudyConfig
from utils.io import write_series, write_study
from utils.study import StudyResult, run_simulation

ROOT = Path(__file__).resolve().parents[1]


def _app(script: str, out_dir: Path) -> AppTest:
    at = AppTest.from_file(str(ROOT / script), default_timeout=60)
    at.session_state["out_dir"] = str(out_dir)
    return at.run()


@pytest.mark.parametrize("script", ["app.py", "pages/0_About.py"])
def test_static_pages_render(script, tmp_path):
    at = _app(script, tmp_path)
    assert not at.exception
    assert at.title


@pytest.mark.parametrize("script", ["pages/1_Run_Series.py", "pages/2_Study_Summary.py"])
def test_empty_output_directory_shows_a_hint(script, tmp_path):
    at = _app(script, tmp_path)
    assert not at.exception
    assert len(at.info) == 1


def test_run_series_page_shows_metrics(tmp_path, small_cfg):
    write_series(tmp_path / "series.csv", run_simulation(small_cfg).series)
    at = _app("pages/1_Run_Series.py", tmp_path)
    assert not at.exception
    assert len(at.metric) == 4
    assert at.dataframe


def test_study_page_flags_partial_studies(tmp_path):
    cfg = StudyConfig(nu2_list=(1e-2, 1e-3), r_list=(2,), grid=GridConfig(16, 33, 0.5))
    write_study(tmp_path, StudyResult(config=cfg, failed={"limit": "non-finite values in state"}))
    at = _app("pages/2_Study_Summary.py", tmp_path)
    assert not at.exception
    assert len(at.warning) == 1
    assert "limit" in at.warning[0].value
