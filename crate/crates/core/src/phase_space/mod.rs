//! Wigner functions on slices and rasters, negativity, and the analytic
//! decayed cat-state Wigner function.

mod css;
mod grid;
mod negativity;
mod wigner;

pub use css::{
    css_negativity_decay, decayed_css_value, decayed_css_wigner, decayed_css_wigner_phase,
    tau_cat_large_alpha, CssDecay,
};
pub use grid::{GridLayout, GridSpec, WignerGrid};
pub use negativity::{fit_negativity_decay, integrate, negativity, NegativityDecayFit};
pub use wigner::{wigner, wigner_at, wigner_scattered};
