//! Flag value parsers. The collision angle accepts the exact symbolic
//! anchors (`pi`, `pi/2`, `3pi/4`, with optional sign) besides plain
//! decimals, so the special angles stay bit-exact multiples of PI.

use collisim_core::collision::AncillaCount;

pub fn theta(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        if v.is_finite() {
            return Ok(v);
        }
        return Err(format!("angle must be finite, got {t}"));
    }
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, t),
    };
    let (num, den) = rest
        .split_once("pi")
        .ok_or_else(|| format!("cannot read angle '{t}'; use a decimal or forms like pi, pi/2, 3pi/4"))?;
    let num: f64 = if num.is_empty() {
        1.0
    } else {
        num.parse::<u32>().map_err(|_| format!("bad multiplier in angle '{t}'"))? as f64
    };
    let den: f64 = match den.strip_prefix('/') {
        None if den.is_empty() => 1.0,
        None => return Err(format!("trailing text in angle '{t}'")),
        Some(d) => {
            let d = d.parse::<u32>().map_err(|_| format!("bad divisor in angle '{t}'"))?;
            if d == 0 {
                return Err("zero divisor in angle".into());
            }
            d as f64
        }
    };
    Ok(sign * num * std::f64::consts::PI / den)
}

pub fn ancilla_count(s: &str) -> Result<AncillaCount, String> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") {
        return Ok(AncillaCount::Infinite);
    }
    let n: u64 = t
        .parse()
        .map_err(|_| format!("reservoir size must be a positive integer or 'inf', got '{t}'"))?;
    if n == 0 {
        return Err("reservoir size must be at least 1".into());
    }
    Ok(AncillaCount::Finite(n))
}

/// Seed resolution order: explicit flag, then COLLISIM_SEED, then the
/// battery default.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("COLLISIM_SEED") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("COLLISIM_SEED must be an unsigned integer, got '{v}'")),
        Err(std::env::VarError::NotPresent) => Ok(collisim_core::validate::DEFAULT_SEED),
        Err(e) => Err(format!("cannot read COLLISIM_SEED: {e}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn symbolic_angles_are_exact() {
        assert_eq!(theta("pi").unwrap(), PI);
        assert_eq!(theta("pi/2").unwrap(), PI / 2.0);
        assert_eq!(theta("pi/3").unwrap(), PI / 3.0);
        assert_eq!(theta("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(theta("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(theta("2pi").unwrap(), 2.0 * PI);
    }

    #[test]
    fn decimal_angles_parse() {
        assert_abs_diff_eq!(theta("1.5707963").unwrap(), PI / 2.0, epsilon = 1e-6);
        assert_eq!(theta("0").unwrap(), 0.0);
        assert_eq!(theta("-0.3").unwrap(), -0.3);
    }

    #[test]
    fn malformed_angles_are_rejected() {
        for bad in ["pie", "pi/0", "2/3", "pi2", "nan", "inf", ""] {
            assert!(theta(bad).is_err(), "accepted '{bad}'");
        }
    }

    #[test]
    fn reservoir_sizes_parse() {
        assert!(matches!(ancilla_count("inf").unwrap(), AncillaCount::Infinite));
        assert!(matches!(ancilla_count("Infinite").unwrap(), AncillaCount::Infinite));
        assert!(matches!(ancilla_count("12").unwrap(), AncillaCount::Finite(12)));
        assert!(ancilla_count("0").is_err());
        assert!(ancilla_count("-3").is_err());
        assert!(ancilla_count("ten").is_err());
    }
}
