import json

import streamlit as st

from utils.io import SUMMARY_NAME, study_tables_to_excel
from utils.ui import apply_base_style, fmt, load_study, out_dir_input

st.set_page_config(page_title="Study Summary", layout="wide")
apply_base_style()

st.title("Study Summary")
st.caption("Viscous runs against the limit solution across the ν₂ family.")

out_dir = out_dir_input()
if not (out_dir / SUMMARY_NAME).is_file():
    st.info(f"No `{SUMMARY_NAME}` in `{out_dir}`. Produce one with `python -m utils.cli study <config>`.")
    st.stop()

summary, members, audits = load_study(str(out_dir))

if summary.get("partial"):
    st.warning("Partial study; failed members: " + ", ".join(f"{k} ({v})" for k, v in summary["failed"].items()))

alpha2 = (summary.get("fits", {}).get("alpha", {}) or {}).get("2")
slope = summary.get("fits", {}).get("gradq_integral_slope")
c1, c2, c3, c4 = st.columns(4)
with c1:
    st.metric("Members", f"{len(members)}")
with c2:
    st.metric("α₂ (fitted)", fmt(alpha2["alpha"] if alpha2 else None, ".3f"))
with c3:
    st.metric("∫‖∇q‖² slope", fmt(slope["alpha"] if slope else None, ".3f"))
with c4:
    st.metric("Runtime (s)", fmt(summary.get("runtime_s"), ".1f"))

st.subheader("Per-ν₂ results")
if members.empty:
    st.info("No member completed.")
else:
    st.dataframe(members, use_container_width=True, hide_index=True)

st.subheader("Fits and audits")
st.dataframe(audits, use_container_width=True, hide_index=True)

with st.expander("Configuration"):
    st.code(json.dumps(summary.get("config", {}), indent=2), language="json")

st.download_button(
    "Download Excel",
    data=study_tables_to_excel({"members": members, "audits": audits}),
    file_name="study_summary.xlsx",
    mime="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet",
)
