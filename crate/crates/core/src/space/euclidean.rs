pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn along(origin: &[f64], direction: &[f64], t: f64) -> Vec<f64> {
    origin.iter().zip(direction).map(|(o, d)| o + t * d).collect()
}

/// Angle between two unit vectors, computed from the chord to stay accurate near 0 and π.
pub fn angle_between(u: &[f64], v: &[f64]) -> f64 {
    let chord = dist(u, v);
    2.0 * (0.5 * chord).min(1.0).asin()
}
