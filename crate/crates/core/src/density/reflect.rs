//! Extension of a density on `Lambda x Lambda` to all of `Z^{2 dim}` by
//! repeated reflection at the faces of the box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SigmaDensity;
use crate::ed::InequalityCertificate;
use crate::kernels::reflection::{fold_1d, reflect_1d};
use crate::model::LatticeBox;

/// `sigma^R(z_m) = sigma(z)` for every cell index `m`.
#[derive(Clone, Debug)]
pub struct ReflectedField {
    base: SigmaDensity,
    lattice: LatticeBox,
}

pub fn reflect_extend(sigma: &SigmaDensity) -> ReflectedField {
    ReflectedField { lattice: sigma.lattice(), base: sigma.clone() }
}

impl ReflectedField {
    pub fn side(&self) -> usize {
        self.lattice.side()
    }

    /// Number of coordinates of a point, `2 dim`.
    pub fn coords(&self) -> usize {
        2 * self.lattice.dim()
    }

    pub fn base(&self) -> &SigmaDensity {
        &self.base
    }

    /// Base-cell preimage of `z` and the cell index of each coordinate.
    pub fn preimage(&self, z: &[i64]) -> (Vec<i64>, Vec<i64>) {
        let ell = self.side() as i64;
        z.iter().map(|&c| fold_1d(c, ell)).unzip()
    }

    /// Site indices `(x1, x2)` of the preimage of `z`.
    pub fn base_sites(&self, z: &[i64]) -> (usize, usize) {
        let d = self.lattice.dim();
        let (p, _) = self.preimage(z);
        let site = |c: &[i64]| {
            let u: Vec<usize> = c.iter().map(|&v| v as usize).collect();
            self.lattice.index_of(&u).expect("folded into the box")
        };
        (site(&p[..d]), site(&p[d..]))
    }

    pub fn get(&self, z: &[i64]) -> f64 {
        let (a, b) = self.base_sites(z);
        self.base.values[(a, b)]
    }

    /// `chi^R(z)`: one if the preimage sites are nearest neighbours.
    pub fn chi(&self, z: &[i64]) -> f64 {
        let (a, b) = self.base_sites(z);
        if self.lattice.are_neighbors(a, b) {
            1.0
        } else {
            0.0
        }
    }
}

/// Integer checks of the reflection map on `samples` random triples:
/// `z - w_m = (-1)^m (z_{(-1)^{m+1} m} - w)`, `fold(z_m) = (z, m)`, and
/// `2l`-periodicity of the folded field in every coordinate.
pub fn reflection_identity_check(field: &ReflectedField, samples: usize, seed: u64) -> InequalityCertificate {
    let ell = field.side() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut first = String::from("none");
    let mut fail = |what: String, failures: &mut usize| {
        if *failures == 0 {
            first = what;
        }
        *failures += 1;
    };
    for _ in 0..samples {
        let z = rng.gen_range(0..ell);
        let w = rng.gen_range(0..ell);
        let m = rng.gen_range(-6i64..=6);
        let sign = if m.rem_euclid(2) == 0 { 1 } else { -1 };
        let lhs = z - reflect_1d(w, m, ell);
        let rhs = sign * (reflect_1d(z, -sign * m, ell) - w);
        if lhs != rhs {
            fail(format!("identity z={z} w={w} m={m}"), &mut failures);
        }
        if fold_1d(reflect_1d(z, m, ell), ell) != (z, m) {
            fail(format!("fold z={z} m={m}"), &mut failures);
        }
        let point: Vec<i64> = (0..field.coords()).map(|_| rng.gen_range(-3 * ell..4 * ell)).collect();
        let axis = rng.gen_range(0..field.coords());
        let mut shifted = point.clone();
        shifted[axis] += 2 * ell;
        if field.get(&point) != field.get(&shifted) {
            fail(format!("periodicity at {point:?} axis {axis}"), &mut failures);
        }
    }
    // Base-cell agreement.
    let n = field.lattice.len();
    for a in 0..n {
        for b in 0..n {
            let mut z: Vec<i64> = field.lattice.sites()[a][..field.lattice.dim()].iter().map(|&c| c as i64).collect();
            z.extend(field.lattice.sites()[b][..field.lattice.dim()].iter().map(|&c| c as i64));
            if field.get(&z) != field.base.values[(a, b)] {
                fail(format!("base cell at {z:?}"), &mut failures);
            }
        }
    }
    InequalityCertificate::new("reflection_identity", -(failures as f64), 0.0, first)
        .with_note(format!("{samples} random triples, {} base points", n * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{eigenstate_densities, sigma_transform};
    use crate::model::SpinValue;

    #[test]
    fn image_formula_examples() {
        assert_eq!(reflect_1d(0, 1, 5), 9);
        assert_eq!(reflect_1d(3, 0, 5), 3);
        assert_eq!(reflect_1d(0, -1, 5), -1);
    }

    #[test]
    fn identity_and_periodicity() {
        let l = LatticeBox::new(2, 3).unwrap();
        let spin = SpinValue::half();
        let rho = eigenstate_densities(&l, spin, 2, Some(3)).unwrap().remove(2);
        let field = reflect_extend(&sigma_transform(&rho, spin));
        let c = reflection_identity_check(&field, 200, 7);
        assert!(c.passed && c.min_slack == 0.0, "{c:?}");
    }
}
