//! Decay-rate machinery: the convexity calculus turning a growth profile
//! into an envelope, envelope calibration against E₀ series, least-squares
//! rate fits and the spectral oracle for linear damping.

mod convexity;
mod envelope;
mod rates;
mod spectral;

pub use convexity::{default_eps0, verify_young, Convexity};
pub use envelope::{calibrate_envelope, calibrate_envelope_search, EnvelopeFit, EPS0_FRACTIONS, HEADROOM};
pub use rates::{fit_rates, fit_rates_above, fit_rates_window, RateFit, DEFAULT_DROP, DEFAULT_FLOOR};
pub use spectral::{spectral_abscissa, Spectrum, MAX_ELEMENTS};
