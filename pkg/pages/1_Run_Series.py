import streamlit as st

from utils.io import list_series
from utils.ui import apply_base_style, fmt, load_series, out_dir_input

st.set_page_config(page_title="Run Series", layout="wide")
apply_base_style()

st.title("Run Series")
st.caption("Diagnostics recorded at every output time of a single run.")

out_dir = out_dir_input()
files = list(list_series(out_dir))
single = out_dir / "series.csv"
if single.is_file():
    files.insert(0, single)

if not files:
    st.info(f"No series CSV found in `{out_dir}`. Produce one with `python -m utils.cli run <config>`.")
    st.stop()

choice = st.selectbox("Series file", options=files, format_func=lambda p: p.name)
try:
    df = load_series(str(choice))
except ValueError as exc:
    st.error(str(exc))
    st.stop()

last = df.iloc[-1]
c1, c2, c3, c4 = st.columns(4)
with c1:
    st.metric("Final time", fmt(last["t"]))
with c2:
    st.metric("Energy (t=0 → end)", f"{fmt(df['energy'].iloc[0])} → {fmt(last['energy'])}")
with c3:
    st.metric("Budget residual", fmt(last["budget_residual"], ".2e"))
with c4:
    st.metric("sup ‖u‖∞", fmt(df["u_linf"].max()))

st.subheader("Series")
cols = st.multiselect("Columns", options=list(df.columns), default=list(df.columns))
st.dataframe(df[cols], use_container_width=True, hide_index=True)

st.subheader("Extremes")
st.dataframe(df.describe().loc[["min", "max"]].T, use_container_width=True)

st.download_button(
    "Download CSV",
    data=df.to_csv(index=False).encode("utf-8"),
    file_name=choice.name,
    mime="text/csv",
)
