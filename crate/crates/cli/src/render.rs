//! Netpbm images of two-dimensional configurations.
//!
//! Rows are axis 0 and columns axis 1. Ising spins become a binary PGM (P5)
//! with `+1 -> 255` and `-1 -> 0`. Potts states become a PPM (P6) whose
//! state `k` (1-based) gets hue `360 (k - 1) / Q` at saturation 0.85 and
//! value 0.95. With the overlay, the image is `(2H - 1) x (2W - 1)`: even
//! pixels are sites, odd pixels sit between them and are mid-gray 128 on a
//! disagreeing edge.

use isinglab::spin::{Model, SpinConfig};

use crate::CliError;

pub const OVERLAY_GRAY: u8 = 128;

type Rgb = [u8; 3];

/// Colour of every Potts state under the documented palette.
pub fn potts_palette(q: u8) -> Vec<Rgb> {
    (0..q).map(|k| hsv(360.0 * f64::from(k) / f64::from(q), 0.85, 0.95)).collect()
}

fn hsv(h: f64, s: f64, v: f64) -> Rgb {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let byte = |t: f64| ((t + m) * 255.0).round() as u8;
    [byte(r), byte(g), byte(b)]
}

/// Encodes a configuration as PGM (Ising) or PPM (Potts).
pub fn render(config: &SpinConfig, overlay: bool) -> Result<Vec<u8>, CliError> {
    let lattice = config.lattice();
    if lattice.dim() != 2 {
        return Err(CliError::Config(format!("rendering needs a 2D lattice, got d = {}", lattice.dim())));
    }
    let (h, w) = (lattice.extents()[0], lattice.extents()[1]);
    let colour = |s: i8| -> Rgb {
        match config.model() {
            Model::Ising => {
                let g = if s > 0 { 255 } else { 0 };
                [g; 3]
            }
            Model::Potts { q } => potts_palette(q)[(s - 1) as usize],
        }
    };
    let at = |r: usize, c: usize| config.get(r * w + c);

    let (ph, pw) = if overlay { (2 * h - 1, 2 * w - 1) } else { (h, w) };
    let mut pixels: Vec<Rgb> = Vec::with_capacity(ph * pw);
    for pr in 0..ph {
        for pc in 0..pw {
            let px = if !overlay {
                colour(at(pr, pc))
            } else {
                // sites covered by this pixel: one, two (edge) or four (corner)
                let rows = if pr % 2 == 0 { vec![pr / 2] } else { vec![pr / 2, pr / 2 + 1] };
                let cols = if pc % 2 == 0 { vec![pc / 2] } else { vec![pc / 2, pc / 2 + 1] };
                let first = at(rows[0], cols[0]);
                let uniform = rows.iter().all(|&r| cols.iter().all(|&c| at(r, c) == first));
                if uniform {
                    colour(first)
                } else {
                    [OVERLAY_GRAY; 3]
                }
            };
            pixels.push(px);
        }
    }

    let mut out = Vec::new();
    match config.model() {
        Model::Ising => {
            out.extend_from_slice(format!("P5\n{pw} {ph}\n255\n").as_bytes());
            out.extend(pixels.iter().map(|p| p[0]));
        }
        Model::Potts { .. } => {
            out.extend_from_slice(format!("P6\n{pw} {ph}\n255\n").as_bytes());
            out.extend(pixels.iter().flatten());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use isinglab::lattice::{BoundaryCondition, Lattice};
    use std::sync::Arc;

    fn config(extents: &[usize], model: Model, states: Vec<i8>) -> SpinConfig {
        let l = Arc::new(Lattice::new(extents.to_vec(), BoundaryCondition::Free).unwrap());
        SpinConfig::from_states(l, model, states).unwrap()
    }

    #[test]
    fn all_plus_pgm() {
        let bytes = render(&config(&[4, 4], Model::Ising, vec![1; 16]), false).unwrap();
        let header = b"P5\n4 4\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[255u8; 16]);
    }

    #[test]
    fn checkerboard_pgm() {
        let bytes = render(&config(&[2, 2], Model::Ising, vec![1, -1, -1, 1]), false).unwrap();
        assert_eq!(&bytes[b"P5\n2 2\n255\n".len()..], &[255, 0, 0, 255]);
    }

    #[test]
    fn overlay_marks_disagreeing_edges() {
        let bytes = render(&config(&[2, 2], Model::Ising, vec![1, -1, 1, -1]), true).unwrap();
        let header = b"P5\n3 3\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[255, 128, 0, 255, 128, 0, 255, 128, 0]);
    }

    #[test]
    fn potts_ppm() {
        let bytes = render(&config(&[1, 3], Model::Potts { q: 3 }, vec![1, 2, 3]), false).unwrap();
        let header = b"P6\n3 1\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        let palette = potts_palette(3);
        assert_eq!(palette[0], [242, 36, 36]);
        let body: Vec<u8> = palette.iter().flatten().copied().collect();
        assert_eq!(&bytes[header.len()..], body.as_slice());
        let mut distinct = potts_palette(8);
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn only_two_dimensions() {
        assert!(render(&config(&[4], Model::Ising, vec![1; 4]), false).is_err());
        assert!(render(&config(&[2, 2, 2], Model::Ising, vec![1; 8]), false).is_err());
    }
}
