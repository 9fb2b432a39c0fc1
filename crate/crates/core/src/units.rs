//! Unit conventions.
//!
//! Energies, frequencies and temperatures are in meV (ħ = k_B = 1). Times are
//! in ħ/meV. Picoseconds appear only at the configuration boundary.

/// ħ in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.658_211_956_9;

/// Converts picoseconds to internal time units (ħ/meV).
pub fn ps_to_internal(ps: f64) -> f64 {
    ps / HBAR_MEV_PS
}

/// Converts internal time units (ħ/meV) to picoseconds.
pub fn internal_to_ps(t: f64) -> f64 {
    t * HBAR_MEV_PS
}

/// Human-readable description embedded in output metadata.
pub const UNIT_CONVENTIONS: &str =
    "hbar=k_B=1; energy,frequency,temperature in meV; internal time in hbar/meV; hbar=0.6582119569 meV*ps";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_loop_time_converts() {
        // 7.5 ps at Ω = 25 meV gives Ω·t_ad ≈ 285
        let t = ps_to_internal(7.5);
        assert!((25.0 * t - 284.86).abs() < 0.01);
        assert!((internal_to_ps(t) - 7.5).abs() < 1e-12);
    }
}
