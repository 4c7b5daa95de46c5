//! Beam geometry for the sector and uniform-linear-array antenna models.
//!
//! Under the sector model a beam of width `theta` keeps the area of the omni
//! disc, so its length is `r * sqrt(2pi / theta)`. The beam is split into
//! radial bands of depth `r`; the chance that the first and the last band
//! are occupied weights the raw length, and the optimal beam width is the
//! candidate maximizing that weighted length.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::topology::{normalize_angle, Point};

/// Default path-loss exponent for the ULA gain-to-range mapping.
pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AntennaConfig {
    Omni {
        range: f64,
    },
    Sector {
        width: f64,
        length: f64,
        orientation: f64,
    },
    Ula {
        elements: u32,
        boresight: f64,
        path_loss_exponent: f64,
        /// Omni range `r` the gain scales.
        range: f64,
        /// When set, reach is rescaled so the main-lobe peak reaches exactly
        /// this distance: `peak * (G / m)^(1/alpha)`.
        calibrated_peak: Option<f64>,
    },
}

impl AntennaConfig {
    pub fn sector(width: f64, length: f64, orientation: f64) -> Result<Self> {
        check_width(width)?;
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidTopology(format!("sector length {length}")));
        }
        Ok(AntennaConfig::Sector {
            width,
            length,
            orientation: normalize_angle(orientation),
        })
    }

    pub fn ula(
        elements: u32,
        boresight: f64,
        path_loss_exponent: f64,
        range: f64,
        calibrated_peak: Option<f64>,
    ) -> Self {
        AntennaConfig::Ula {
            elements: elements.max(1),
            boresight: normalize_angle(boresight),
            path_loss_exponent,
            range,
            calibrated_peak,
        }
    }

    pub fn is_directional(&self) -> bool {
        !matches!(self, AntennaConfig::Omni { .. })
    }

    /// Whether a transmitter at `origin` with this pattern reaches `target`.
    pub fn covers(&self, origin: &Point, target: &Point) -> bool {
        match *self {
            AntennaConfig::Omni { range } => origin.distance(target) <= range,
            AntennaConfig::Sector {
                width,
                length,
                orientation,
            } => sector_covers(origin, orientation, width, length, target),
            AntennaConfig::Ula {
                elements,
                boresight,
                path_loss_exponent,
                range,
                calibrated_peak,
            } => {
                if origin == target {
                    return true;
                }
                let phi = origin.bearing_to(target);
                let reach = match calibrated_peak {
                    Some(peak) => ula_reach_calibrated(elements, boresight, phi, peak, path_loss_exponent),
                    None => ula_reach(elements, boresight, phi, range, path_loss_exponent),
                };
                origin.distance(target) <= reach
            }
        }
    }
}

fn check_width(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= TAU {
        Ok(())
    } else {
        Err(Error::InvalidBeamWidth(theta))
    }
}

/// `r * sqrt(2pi / theta)`.
pub fn sector_beam_length(theta: f64, r: f64) -> Result<f64> {
    check_width(theta)?;
    Ok(r * (TAU / theta).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionWeights {
    /// Area of the innermost band.
    pub first_area: f64,
    /// Area of the outermost band of depth `min(r, r(theta))`.
    pub last_area: f64,
    /// P(at least one of `n` neighbours falls in the first band).
    pub p_first: f64,
    /// P(at least one of `n` neighbours falls in the last band).
    pub p_last: f64,
}

/// `n` may be fractional (a mean degree).
pub fn region_weights(theta: f64, r: f64, n: f64) -> Result<RegionWeights> {
    let length = sector_beam_length(theta, r)?;
    let half = theta / 2.0;
    let disc = PI * r * r;
    let first_area = half * r * r;
    let inner = (length - r).max(0.0);
    let last_area = (half * (length * length - inner * inner)).min(half * length * length);
    let occupied = |area: f64| {
        let miss = (1.0 - (area / disc).min(1.0)).max(0.0);
        1.0 - miss.powf(n)
    };
    Ok(RegionWeights {
        first_area,
        last_area,
        p_first: occupied(first_area),
        p_last: occupied(last_area),
    })
}

/// Beam length weighted by the band-occupancy probabilities.
pub fn weighted_beam_length(theta: f64, r: f64, n: f64) -> Result<f64> {
    let w = region_weights(theta, r, n)?;
    Ok(sector_beam_length(theta, r)? * w.p_first * w.p_last)
}

/// Candidate beam width with the largest weighted length. Ties go to the
/// narrower beam.
pub fn optimal_beamwidth(candidates: &[f64], r: f64, n: f64) -> Result<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &theta in candidates {
        let score = weighted_beam_length(theta, r, n)?;
        best = match best {
            Some((bt, bs)) if bs > score || (bs == score && bt <= theta) => Some((bt, bs)),
            _ => Some((theta, score)),
        };
    }
    best.map(|(t, _)| t).ok_or(Error::NoCandidates)
}

/// `{2pi / k^2 : k = 1..=kmax}`, beam lengths exactly `k * r`.
pub fn default_theta_grid(kmax: u32) -> Vec<f64> {
    (1..=kmax).map(|k| TAU / f64::from(k * k)).collect()
}

/// Closed sector predicate; angles compared on the circle.
pub fn sector_covers(origin: &Point, orientation: f64, theta: f64, length: f64, target: &Point) -> bool {
    if origin == target {
        return true;
    }
    if origin.distance(target) > length {
        return false;
    }
    angular_distance(origin.bearing_to(target), orientation) <= theta / 2.0
}

/// Smallest absolute difference between two angles, in `[0, pi]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    d.min(TAU - d)
}

/// Normalized power gain of an `m`-element half-wavelength ULA steered to
/// `boresight`, evaluated at bearing `phi`. Peak value `m`.
pub fn ula_gain(m: u32, boresight: f64, phi: f64) -> f64 {
    if m <= 1 {
        return 1.0;
    }
    let m = f64::from(m);
    let psi = PI * (phi.cos() - boresight.cos());
    let den = (psi / 2.0).sin();
    if den.abs() < 1e-12 {
        return m;
    }
    let num = (m * psi / 2.0).sin();
    (num * num) / (m * den * den)
}

/// `r * G(phi)^(1/alpha)`.
pub fn ula_reach(m: u32, boresight: f64, phi: f64, r: f64, alpha: f64) -> f64 {
    if m <= 1 {
        return r;
    }
    r * ula_gain(m, boresight, phi).powf(1.0 / alpha)
}

/// Reach rescaled so the main lobe extends exactly to `peak`.
pub fn ula_reach_calibrated(m: u32, boresight: f64, phi: f64, peak: f64, alpha: f64) -> f64 {
    if m <= 1 {
        return peak;
    }
    peak * (ula_gain(m, boresight, phi) / f64::from(m)).powf(1.0 / alpha)
}

/// Element count standing in for a sector beam of length `r_theta_star`.
pub fn map_sector_to_ula(r_theta_star: f64, r: f64) -> u32 {
    ((r_theta_star / r).round() as u32).max(1)
}

/// `(phi, gain)` samples over `[0, 2pi)` for plotting.
pub fn gain_pattern(m: u32, boresight: f64, samples: usize) -> Vec<(f64, f64)> {
    (0..samples)
        .map(|i| {
            let phi = TAU * i as f64 / samples as f64;
            (phi, ula_gain(m, boresight, phi))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beam_length_examples() {
        assert_eq!(sector_beam_length(TAU, 1.0).unwrap(), 1.0);
        assert!((sector_beam_length(PI / 2.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((sector_beam_length(PI / 8.0, 1.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(sector_beam_length(0.0, 1.0).is_err());
        assert!(sector_beam_length(TAU + 1e-9, 1.0).is_err());
        assert!(sector_beam_length(-1.0, 1.0).is_err());
    }

    #[test]
    fn region_weights_quarter_beam() {
        // hand evaluation: A_f/(pi r^2) = 1/4, A_l/(pi r^2) = 3/4
        let w = region_weights(PI / 2.0, 1.0, 8.0).unwrap();
        assert!((w.first_area / PI - 0.25).abs() < 1e-12);
        assert!((w.last_area / PI - 0.75).abs() < 1e-12);
        assert!((w.p_first - (1.0 - 0.75f64.powi(8))).abs() < 1e-12);
        assert!((w.p_last - (1.0 - 0.25f64.powi(8))).abs() < 1e-12);
        assert!((w.p_first - 0.89989).abs() < 1e-5);
        assert!((w.p_last - 0.99998).abs() < 1e-5);
    }

    #[test]
    fn region_weights_full_disc() {
        let w = region_weights(TAU, 1.0, 5.0).unwrap();
        assert!((w.first_area - PI).abs() < 1e-12);
        assert!((w.last_area - PI).abs() < 1e-12);
        assert_eq!(w.p_first, 1.0);
        assert_eq!(w.p_last, 1.0);
    }

    #[test]
    fn region_weights_empty_neighbourhood() {
        for theta in [0.1, 1.0, PI, TAU] {
            let w = region_weights(theta, 1.0, 0.0).unwrap();
            assert_eq!(w.p_first, 0.0);
            assert_eq!(w.p_last, 0.0);
            assert_eq!(weighted_beam_length(theta, 1.0, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn weighted_length_examples() {
        let rc = weighted_beam_length(PI / 2.0, 1.0, 8.0).unwrap();
        let expect = 2.0 * (1.0 - 0.75f64.powi(8)) * (1.0 - 0.25f64.powi(8));
        assert!((rc - expect).abs() < 1e-12);
        assert!((rc - 1.7998).abs() < 1e-4);
        assert_eq!(weighted_beam_length(TAU, 1.0, 3.0).unwrap(), 1.0);
        assert_eq!(weighted_beam_length(TAU, 2.5, 1.0).unwrap(), 2.5);
    }

    #[test]
    fn optimal_beamwidth_examples() {
        assert_eq!(optimal_beamwidth(&[TAU], 1.0, 4.0).unwrap(), TAU);
        assert!(matches!(optimal_beamwidth(&[], 1.0, 4.0), Err(Error::NoCandidates)));
        // n = 0: every score is 0, narrowest wins the tie
        let grid = default_theta_grid(8);
        assert_eq!(optimal_beamwidth(&grid, 1.0, 0.0).unwrap(), grid[7]);
    }

    #[test]
    fn sector_cover_examples() {
        let o = Point::new(0.0, 0.0);
        assert!(sector_covers(&o, 0.0, PI / 2.0, 2.0, &o));
        assert!(sector_covers(&o, 0.0, PI / 2.0, 2.0, &Point::new(2.0, 0.0)));
        assert!(!sector_covers(&o, 0.0, PI / 2.0, 2.0, &Point::new(2.0 + 1e-9, 0.0)));
        assert!(!sector_covers(&o, 0.0, PI / 2.0, 2.0, &Point::new(-1.0, 0.0)));
        // wraps across 0
        assert!(sector_covers(&o, 0.1, PI / 2.0, 2.0, &Point::new(1.0, -0.5)));
        assert!(sector_covers(&o, TAU - 0.1, PI / 2.0, 2.0, &Point::new(1.0, 0.5)));
    }

    #[test]
    fn ula_gain_examples() {
        for phi in [0.0, 0.3, 2.0, 5.0] {
            assert_eq!(ula_gain(1, 1.0, phi), 1.0);
        }
        assert_eq!(ula_gain(4, 1.1, 1.1), 4.0);
        // first null of m=4 broadside: psi = pi/2 -> cos(phi) = 1/2
        assert!(ula_gain(4, PI / 2.0, PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn ula_first_null_by_scan() {
        // oracle: walk away from boresight until the gain stops decreasing
        let b = PI / 2.0;
        let step = 1e-6;
        let mut phi = b;
        let mut g = ula_gain(4, b, phi);
        loop {
            let next = ula_gain(4, b, phi - step);
            if next > g {
                break;
            }
            phi -= step;
            g = next;
        }
        assert!((phi - PI / 3.0).abs() < 1e-5);
        assert!(ula_gain(4, b, PI / 3.0) < 1e-9);
    }

    #[test]
    fn ula_reach_examples() {
        for phi in [0.0, 1.0, 4.0] {
            assert_eq!(ula_reach(1, 0.3, phi, 1.5, 2.0), 1.5);
        }
        assert!((ula_reach(4, 0.7, 0.7, 1.0, 2.0) - 2.0).abs() < 1e-15);
        assert!(ula_reach(4, PI / 2.0, PI / 3.0, 1.0, 2.0) < 1e-4);
        assert!((ula_reach_calibrated(3, 0.7, 0.7, 3.0, 2.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn sector_to_ula_mapping() {
        assert_eq!(map_sector_to_ula(1.0, 1.0), 1);
        assert_eq!(map_sector_to_ula(2.83, 1.0), 3);
        assert_eq!(map_sector_to_ula(4.0, 2.0), 2);
    }

    #[test]
    fn config_coverage() {
        let o = Point::new(0.0, 0.0);
        let t = Point::new(0.0, 1.5);
        assert!(!AntennaConfig::Omni { range: 1.0 }.covers(&o, &t));
        assert!(AntennaConfig::sector(PI / 2.0, 2.0, PI / 2.0).unwrap().covers(&o, &t));
        assert!(AntennaConfig::ula(4, PI / 2.0, 2.0, 1.0, None).covers(&o, &t));
        assert!(!AntennaConfig::ula(4, 0.0, 2.0, 1.0, None).covers(&o, &t));
        assert!(AntennaConfig::sector(0.0, 2.0, 0.0).is_err());
    }
}
