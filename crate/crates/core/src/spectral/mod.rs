//! Fourier and grid realizations of compact/weakly-mixing splittings.
//!
//! Two concrete systems are supported: a circle rotation, where every
//! observable is compact, and the skew product `(x, y) ↦ (x + ω, 2y)` on the
//! two-torus, whose compact part is the mean over `y`.

mod eigen;
mod fourier;
mod grid;
mod vdc;
mod wm;

pub use eigen::{eigen_return_times, eigen_return_times_with, return_distance, EigenReturnReport};
pub use fourier::{
    fourier_indicator, fourier_indicator_box, koopman_phase_drift, koopman_rotation, unit_phase, BaseSpace,
    FourierObservable,
};
pub use grid::{
    jdlg_split_product, jdlg_split_product_with, jdlg_split_rotation, GridFunction, IndicatorChecks, SpectralSplit,
    SystemTag,
};
pub use vdc::{vdc_surrogate, vdc_surrogate_with, HilbertVector, VdcReport};
pub use wm::{
    grid_spectra, grid_spectrum, wm_average_vanishing, wm_average_vanishing_with, GridSpectrum, ProductMap, WindowNorm,
    WmReport,
};

#[cfg(test)]
mod tests;
