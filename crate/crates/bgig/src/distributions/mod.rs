//! GIG and bilateral GIG laws.

mod bgig;
mod fourier;
mod gig;
mod mellin;
mod params;
mod sample;

pub use bgig::{
    bgig_chf, bgig_chf_analytic, bgig_cumulants, bgig_levy_density, bgig_ln_chf_analytic, bgig_moment, bgig_pdf,
    mode, mode_of, mode_side, tail_constants, BgigDensity, CumulantSet, LevyDensity, ModeSide, TailConstants,
};
pub use fourier::{FourierInverter, InversionConfig};
pub use gig::{
    cumulant_polynomials, gig_chf, gig_cumulants, gig_ln_chf_analytic, gig_ln_norm, gig_mellin, gig_pdf,
    gig_raw_moment,
};
pub use params::{BgigParams, GigParams};
pub use mellin::{bgig_pdf_mellin, MellinConfig};
pub use sample::{bgig_sample, gig_sample};
