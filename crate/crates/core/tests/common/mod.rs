//! Reference implementations shared by the oracle tests.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const EULER: f64 = 0.577_215_664_901_532_9;

/// J0, J1, Y0, Y1 from their ascending series.
pub fn series(x: f64) -> [f64; 4] {
    let q = x * x / 4.0;
    let (mut j0, mut j1, mut y0s, mut y1s) = (0.0, 0.0, 0.0, 0.0);
    // t0 = (-q)^k / (k!)^2, t1 = (-1)^k (x/2)^(2k+1) / (k! (k+1)!)
    let mut t0 = 1.0;
    let mut t1 = x / 2.0;
    let mut hk = 0.0;
    for k in 0..200 {
        let hk1 = hk + 1.0 / (k as f64 + 1.0);
        j0 += t0;
        j1 += t1;
        y0s -= hk * t0;
        y1s += (hk + hk1) * t1;
        let kf = k as f64 + 1.0;
        t0 *= -q / (kf * kf);
        t1 *= -q / (kf * (kf + 1.0));
        hk = hk1;
        if t0.abs() < 1e-30 && t1.abs() < 1e-30 {
            break;
        }
    }
    let lg = (x / 2.0).ln() + EULER;
    let y0 = 2.0 / PI * (lg * j0 + y0s);
    let y1 = 2.0 / PI * lg * j1 - 2.0 / (PI * x) - y1s / PI;
    [j0, j1, y0, y1]
}
