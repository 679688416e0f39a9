// Copyright 2026 The iqc Authors
// SPDX-License-Identifier: Apache-2.0

//! Double-double absolute time.
//!
//! Schedules reach `ν t ~ 1e11` rad; a plain `f64` product would carry
//! errors of order `1e-5` rad per phase.

use qd::Quad;
use serde::{Deserialize, Serialize};

const TWO_PI: Quad = Quad(std::f64::consts::TAU, 2.4492935982947064e-16);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Clock {
    pub hi: f64,
    pub lo: f64,
}

impl Clock {
    pub const ZERO: Clock = Clock { hi: 0.0, lo: 0.0 };

    pub fn from_f64(t: f64) -> Self {
        Clock { hi: t, lo: 0.0 }
    }

    fn quad(self) -> Quad {
        Quad(self.hi, self.lo)
    }

    pub fn advanced(self, dt: f64) -> Self {
        let q = self.quad().add_accurate(Quad::from_f64(dt));
        Clock { hi: q.0, lo: q.1 }
    }

    pub fn as_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// `rate·t` reduced to `(−π, π]`.
    pub fn phase(self, rate: f64) -> f64 {
        if rate == 0.0 {
            return 0.0;
        }
        let x = Quad::from_f64(rate) * self.quad();
        let mut r = x - (x / TWO_PI).round_half() * TWO_PI;
        let v = r.0 + r.1;
        if v > std::f64::consts::PI {
            r -= TWO_PI;
        } else if v <= -std::f64::consts::PI {
            r += TWO_PI;
        }
        r.0 + r.1
    }
}

trait RoundHalf {
    fn round_half(self) -> Self;
}

impl RoundHalf for Quad {
    fn round_half(self) -> Self {
        let h = self.0.round();
        if h == self.0 {
            let l = self.1.round();
            Quad(h, 0.0) + Quad(l, 0.0)
        } else {
            Quad(h, 0.0)
        }
    }
}
