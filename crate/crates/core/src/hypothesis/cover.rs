//! Explicit covers of the sieve components: the σ-interval and a box of
//! basis coefficients.

use crate::error::{ensure_positive, Error, Result};

/// Largest cover [`cover_mean_set`] will materialise.
pub const MAX_COVER_SIZE: f64 = 1e7;

/// Centers `radius, 3·radius, …` covering `(0, upper]`.
pub fn cover_interval(upper: f64, radius: f64) -> Result<Vec<f64>> {
    ensure_positive("upper", upper)?;
    ensure_positive("radius", radius)?;
    let count = (upper / (2.0 * radius)).ceil().max(1.0);
    if count > MAX_COVER_SIZE {
        return Err(Error::BudgetExceeded {
            what: "interval cover",
            required: count,
            limit: MAX_COVER_SIZE,
        });
    }
    Ok((0..count as usize)
        .map(|i| (2 * i + 1) as f64 * radius)
        .collect())
}

fn grid_per_axis(dim: usize, halfwidth: f64, radius: f64) -> (usize, f64) {
    let spacing = 2.0 * radius / (dim as f64).sqrt();
    let per_axis = (2.0 * halfwidth / spacing).ceil().max(1.0) as usize;
    (per_axis, spacing)
}

/// Number of centers [`cover_mean_set`] would produce (as `f64`, since it
/// can overflow any integer type).
pub fn cover_mean_set_size(dim: usize, halfwidth: f64, radius: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::invalid("basis_dim", "must be at least 1"));
    }
    ensure_positive("box_halfwidth", halfwidth)?;
    ensure_positive("radius", radius)?;
    let (per_axis, _) = grid_per_axis(dim, halfwidth, radius);
    Ok((per_axis as f64).powi(dim as i32))
}

/// Axis-aligned grid with spacing `2·radius/√dim` whose L2 balls of `radius`
/// cover `[−halfwidth, halfwidth]^dim`. Centers are in lexicographic order.
pub fn cover_mean_set(dim: usize, halfwidth: f64, radius: f64) -> Result<Vec<Vec<f64>>> {
    let size = cover_mean_set_size(dim, halfwidth, radius)?;
    if size > MAX_COVER_SIZE {
        return Err(Error::BudgetExceeded {
            what: "coefficient cover",
            required: size,
            limit: MAX_COVER_SIZE,
        });
    }
    let (per_axis, spacing) = grid_per_axis(dim, halfwidth, radius);
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -halfwidth + spacing * (i as f64 + 0.5))
        .collect();
    let mut out = Vec::with_capacity(size as usize);
    let mut idx = vec![0usize; dim];
    loop {
        out.push(idx.iter().map(|&i| axis[i]).collect());
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(out);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < per_axis {
                break;
            }
            idx[d] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn interval_example() {
        assert_eq!(
            cover_interval(10.0, 1.0).unwrap(),
            vec![1.0, 3.0, 5.0, 7.0, 9.0]
        );
        assert_eq!(cover_interval(1.5, 1.0).unwrap(), vec![1.0]);
        assert!(cover_interval(0.0, 1.0).is_err());
    }

    #[test]
    fn interval_covers_random_points() {
        let mut rng = crate::rng::stream(1, 0);
        for (upper, radius) in [(10.0, 1.0), (7.3, 0.4), (0.5, 2.0)] {
            let centers = cover_interval(upper, radius).unwrap();
            assert_eq!(
                centers.len(),
                (upper / (2.0 * radius)).ceil().max(1.0) as usize
            );
            for _ in 0..1000 {
                let x = upper * (1.0 - rng.random::<f64>());
                assert!(centers.iter().any(|c| (c - x).abs() <= radius + 1e-12));
            }
        }
    }

    #[test]
    fn mean_set_small_cases() {
        assert!(cover_mean_set(1, 1.0, 1.0).unwrap().len() <= 2);
        let bound =
            |d: usize, w: f64, r: f64| ((w * (d as f64).sqrt() / r).ceil() + 1.0).powi(d as i32);
        for (d, w, r) in [(1, 1.0, 1.0), (2, 1.0, 0.3), (3, 2.0, 0.7)] {
            assert!(cover_mean_set(d, w, r).unwrap().len() as f64 <= bound(d, w, r));
        }
        let mut last = 0.0;
        for w in [0.5, 1.0, 2.0, 4.0] {
            let s = cover_mean_set_size(2, w, 0.3).unwrap();
            assert!(s >= last);
            last = s;
        }
        assert!(matches!(
            cover_mean_set(20, 10.0, 0.1),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn mean_set_covers_random_points() {
        let mut rng = crate::rng::stream(2, 0);
        let (w, r) = (1.3, 0.25);
        let centers = cover_mean_set(2, w, r).unwrap();
        for _ in 0..1000 {
            let p = [
                w * (2.0 * rng.random::<f64>() - 1.0),
                w * (2.0 * rng.random::<f64>() - 1.0),
            ];
            let best = centers
                .iter()
                .map(|c| ((c[0] - p[0]).powi(2) + (c[1] - p[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!(best <= r + 1e-12);
        }
    }
}
