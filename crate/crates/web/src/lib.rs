//! Browser bindings. Every export returns a flat `Float64Array`; the page
//! splits it into columns.

use pds_core::rare::RareOptions;
use pds_core::systems::{PiecewiseSpring, SpringLaw};
use pds_core::*;
use wasm_bindgen::prelude::*;

const T_ALPHA: f64 = 5000.0;
const MU_ALPHA: f64 = 0.1;
const SIGMA_ALPHA: f64 = 0.0141;

/// `[ω..., S(ω)...]` on `n` points of the default window.
pub fn spectrum_table(q: f64, shift: f64, n: usize) -> Result<Vec<f64>> {
    let s = BackgroundSpectrum::new(q, shift)?;
    let g = s.default_grid();
    let n = n.max(2);
    let omega: Vec<f64> =
        (0..n).map(|i| g.omega_min + (g.omega_max - g.omega_min) * i as f64 / (n - 1) as f64).collect();
    let density = omega.iter().map(|w| s.density(*w)).collect::<Vec<_>>();
    Ok([omega, density].concat())
}

/// `[z..., F_cubic(z)..., F_piecewise(z)...]` on `[-z_max, z_max]`.
pub fn restoring_table(c: f64, k_o: f64, alpha_pos: f64, alpha_neg: f64, sigma_zeta: f64, z_max: f64, n: usize) -> Result<Vec<f64>> {
    let cubic = SpringLaw::Cubic { k: 0.0, c };
    let piecewise = SpringLaw::Piecewise(PiecewiseSpring::new(k_o, alpha_pos, alpha_neg, sigma_zeta)?);
    let n = n.max(2);
    let z: Vec<f64> = (0..n).map(|i| -z_max + 2.0 * z_max * i as f64 / (n - 1) as f64).collect();
    let fc = z.iter().map(|z| cubic.force(*z)).collect::<Vec<_>>();
    let fp = z.iter().map(|z| piecewise.force(*z)).collect::<Vec<_>>();
    Ok([z, fc, fp].concat())
}

/// Seat with a cubic attachment under the reference forcing, at screening
/// resolution. Returns `[P_r, r..., p(r)...]` for the absolute seat displacement.
pub fn seat_pdf_table(seat_damping: f64, nes_damping: f64, nes_c: f64) -> Result<Vec<f64>> {
    let forcing =
        ForcingModel::new(BackgroundSpectrum::new(1.582e-4, 1.0)?, T_ALPHA, MU_ALPHA, SIGMA_ALPHA, ImpulsePattern::PrimaryOnly)?;
    let attachment = (nes_c > 0.0).then(|| Attachment::cubic_nes(0.05, nes_damping, nes_c));
    let model = SystemModel::seat(Oscillator::new(1.0, seat_damping, 1.0), attachment)?;
    let q = Quantity::displacement(Dof::Seat);
    let opts = PdsOptions { rare: RareOptions::screening(), ..PdsOptions::default() };
    let pdf = estimate(&model, &forcing, &[q], &opts)?.pdf(q, Frame::Absolute)?;
    Ok([vec![pdf.probability], pdf.values, pdf.density].concat())
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn spectrum(q: f64, shift: f64, n: usize) -> std::result::Result<Vec<f64>, JsError> {
    js(spectrum_table(q, shift, n))
}

#[wasm_bindgen]
pub fn restoring_force(
    c: f64,
    k_o: f64,
    alpha_pos: f64,
    alpha_neg: f64,
    sigma_zeta: f64,
    z_max: f64,
    n: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    js(restoring_table(c, k_o, alpha_pos, alpha_neg, sigma_zeta, z_max, n))
}

#[wasm_bindgen]
pub fn seat_pdf(seat_damping: f64, nes_damping: f64, nes_c: f64) -> std::result::Result<Vec<f64>, JsError> {
    js(seat_pdf_table(seat_damping, nes_damping, nes_c))
}
