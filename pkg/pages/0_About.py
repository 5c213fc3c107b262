import streamlit as st

from utils.ui import apply_base_style

st.set_page_config(page_title="About", layout="wide")
apply_base_style()

st.title("About")

st.markdown(
    """The harness integrates the 2D Navier–Stokes equations in a periodic channel with **anisotropic viscosity**
(ν₁ ∂ₓₓ horizontally, ν₂ ∂ᵧᵧ vertically) and compares them with the **ν₂ = 0 limit system** started from the same data.

### Discretization
- **x:** Fourier, 2/3-rule dealiasing of products
- **y:** second-order finite differences on a wall-refined grid, trapezoidal quadrature
- **time:** Adams–Bashforth 2 for advection, Crank–Nicolson for diffusion
- **walls:** Thom's wall-vorticity closure for no-slip at y = 0, ω = 0 at the free-slip wall y = 1

### What is measured
- **Energy identity:** E(t) + 2ν₁∫(‖uₓ‖² + ‖vₓ‖²) + 2ν₂∫(‖u_y‖² + ‖v_y‖²) = E(0)
- **Pressure split:** flow pressure **p** (Neumann Poisson problem) and boundary-layer pressure **q** (closed form per mode)
- **Uniform bounds:** ∫‖∇p‖², ∫‖∇q‖², sup‖vₓ‖, sup‖u‖∞, ν₂²∫‖u_yy‖² across the ν₂ family
- **Convergence:** sup over t of ‖u − U‖ᵣ + ‖v − V‖ᵣ against ν₂ with a fitted exponent
- **Audits:** triple-product estimate, ‖∇q‖ bound, low/high frequency split of p, wall-trace inequalities
"""
)

st.markdown(
    """### Limits
- Constants of the inequalities are reported as measured sup-ratios, not as analytic values.
- The limit solution is itself numerical; the study includes a resolution check.
- No plots are produced here; the CSV and JSON artifacts load directly into external tools.
"""
)
