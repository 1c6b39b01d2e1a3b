//! Shared body catalog for integration tests.

#![allow(dead_code)]

use intvol::BodySpec;

pub const DIMS: [usize; 7] = [1, 2, 3, 8, 16, 32, 64];
pub const SCALES: [f64; 3] = [0.5, 1.0, 2.0];
pub const SIDES: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// Balls and cubes over the fixture grid, boxes cycling through `SIDES`, and a few
/// products and zonotopes; 61 bodies with `n ≤ 64`.
pub fn catalog() -> Vec<BodySpec> {
    let mut out = Vec::new();
    for &n in &DIMS {
        for &s in &SCALES {
            out.push(BodySpec::ball(n, s));
            out.push(BodySpec::cube(n, s));
        }
        out.push(BodySpec::parallelotope(
            (0..n).map(|i| SIDES[i % 4]).collect(),
        ));
        out.push(BodySpec::parallelotope(
            (0..n).map(|i| SIDES[3 - i % 4]).collect(),
        ));
    }
    for &n in &[2usize, 4, 8] {
        out.push(BodySpec::Product {
            left: Box::new(BodySpec::ball(n, 1.0)),
            right: Box::new(BodySpec::cube(n, 2.0)),
        });
    }
    out.push(BodySpec::Zonotope {
        dim: 2,
        generators: vec![
            vec![1.0, 0.0],
            vec![0.5, 0.5],
            vec![0.0, 2.0],
            vec![-1.0, 1.0],
        ],
    });
    out.push(BodySpec::Zonotope {
        dim: 3,
        generators: vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
            vec![0.5, -0.5, 2.0],
        ],
    });
    out
}
