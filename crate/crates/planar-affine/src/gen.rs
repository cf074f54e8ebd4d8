//! Seeded random inputs for property checks and the verify suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conjugacy::FormalMap;
use crate::series::{Coeff, Series};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// a/b with |a| ≤ 3 and 1 ≤ b ≤ 3.
    pub fn small_rational(&mut self) -> Coeff {
        let a = self.int(-3, 3);
        let b = self.int(1, 3);
        Coeff::ratio(a, b)
    }

    pub fn unit_float(&mut self) -> f64 {
        self.rng.gen_range(-1.0..1.0)
    }

    /// Sparse exact polynomial with terms of degree lo..=hi, each present with probability `density`.
    pub fn poly(&mut self, order: u32, lo: u32, hi: u32, density: f64) -> Series {
        let mut terms = Vec::new();
        for d in lo..=hi.min(order) {
            for a in 0..=d {
                if self.chance(density) {
                    let c = self.small_rational();
                    terms.push(((a, d - a), c));
                }
            }
        }
        Series::from_terms(order, terms)
    }

    /// Like `poly` with coefficients uniform in [−scale, scale].
    pub fn float_poly(&mut self, order: u32, lo: u32, hi: u32, density: f64, scale: f64) -> Series {
        let mut terms = Vec::new();
        for d in lo..=hi.min(order) {
            for a in 0..=d {
                if self.chance(density) {
                    terms.push(((a, d - a), Coeff::float(scale * self.unit_float())));
                }
            }
        }
        Series::from_terms(order, terms)
    }

    /// (x + h1, y + h2) with h of degree 2..=max_deg.
    pub fn near_identity(&mut self, order: u32, max_deg: u32, density: f64) -> FormalMap {
        let hx = self.poly(order, 2, max_deg, density);
        let hy = self.poly(order, 2, max_deg, density);
        FormalMap::raw(&Series::x(order) + &hx, &Series::y(order) + &hy)
    }

    pub fn float_near_identity(&mut self, order: u32, max_deg: u32, density: f64, scale: f64) -> FormalMap {
        let hx = self.float_poly(order, 2, max_deg, density, scale);
        let hy = self.float_poly(order, 2, max_deg, density, scale);
        FormalMap::raw(&Series::x(order).to_float() + &hx, &Series::y(order).to_float() + &hy)
    }
}
