import streamlit as st

from utils.ui import apply_base_style

st.set_page_config(
    page_title="Anisotropic channel flow: vanishing-viscosity harness",
    layout="wide",
)

apply_base_style()

st.title("Anisotropic channel flow")
st.caption("Results browser for the solver runs and the vanishing-viscosity study produced by the command line.")

col1, col2, col3 = st.columns(3)
with col1:
    st.markdown("**Systems**")
    st.markdown("- Viscous: horizontal viscosity **ν₁**, vertical **ν₂**")
    st.markdown("- Limit: **ν₂ = 0**, horizontal viscosity only")
with col2:
    st.markdown("**Channel**")
    st.markdown("- Periodic in x on [−π, π)")
    st.markdown("- No-slip wall at y = 0, free-slip wall at y = 1")
with col3:
    st.markdown("**Note**")
    st.markdown("<span class='badge'>Read-only</span>", unsafe_allow_html=True)
    st.markdown(
        "<div class='muted'>The pages only read artifacts. Runs and studies are produced with "
        "<code>python -m utils.cli</code>.</div>",
        unsafe_allow_html=True,
    )

st.divider()

st.markdown(
    """
### How to use
- **Run Series:** pick a `series*.csv` in the output directory to browse norms, dissipation and the energy budget over time.
- **Study Summary:** open `study_summary.json` to see per-ν₂ differences against the limit solution, the fitted rates and the audit spreads, and download them as Excel.

Set the output directory in the sidebar; it defaults to `out/`.
"""
)
