//! Logarithmic unit conversions. Everything inside the crate is linear
//! (watts, ratios); dB and dBm only appear in configuration and files.

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_levels() {
        assert_relative_eq!(dbm_to_watts(20.0), 0.1, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watts(-70.0), 1e-10, max_relative = 1e-12);
        assert_relative_eq!(db_to_linear(10.0), 10.0, max_relative = 1e-12);
        assert_relative_eq!(watts_to_dbm(0.1), 20.0, max_relative = 1e-12);
        assert_relative_eq!(linear_to_db(10.0), 10.0, max_relative = 1e-12);
    }
}
