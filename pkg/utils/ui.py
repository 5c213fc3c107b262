from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Tuple

import pandas as pd
import streamlit as st

from utils import io as artifacts

DEFAULT_OUT_DIR = "out"


def apply_base_style(app_title: str | None = None) -> None:
    """Shared page style for the results browser."""
    st.markdown(
        """
        <style>
          .block-container { padding-top: 2rem; padding-bottom: 2.5rem; max-width: 1180px; }
          h1, h2, h3 { letter-spacing: -0.2px; }
          [data-testid="stMetricValue"] { font-size: 1.4rem; }
          .muted { color: rgba(49, 51, 63, 0.72); font-size: 0.95rem; }
          .badge { display:inline-block; padding:0.15rem 0.55rem; border-radius: 999px; background:#f1f3f6; }
          #MainMenu { visibility: hidden; }
          footer { visibility: hidden; }
        </style>
        """,
        unsafe_allow_html=True,
    )

    if app_title:
        st.markdown(f"<div class='muted'>{app_title}</div>", unsafe_allow_html=True)


def out_dir_input(key: str = "out_dir") -> Path:
    """Sidebar text box for the artifact directory, shared across pages."""
    value = st.sidebar.text_input("Output directory", value=st.session_state.get(key, DEFAULT_OUT_DIR), key=f"{key}_box")
    st.session_state[key] = value
    return Path(value)


@st.cache_data(show_spinner=False)
def load_series(path: str | Path) -> pd.DataFrame:
    """Run series CSV with its column list validated."""
    return artifacts.read_series(path)


@st.cache_data(show_spinner=False)
def load_study(out_dir: str | Path) -> Tuple[Dict[str, Any], pd.DataFrame, pd.DataFrame]:
    """(summary, member table, audit table) of a study directory."""
    return artifacts.load_study(out_dir)


def fmt(value: Any, spec: str = ".4g") -> str:
    if value is None:
        return "N/A"
    try:
        return format(float(value), spec)
    except (TypeError, ValueError):
        return str(value)
