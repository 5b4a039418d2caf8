use std::collections::BTreeMap;
use std::fmt;

/// A polynomial in `(x, y)` with `f64` coefficients, keyed by exponents.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly {
    /// From `(coefficient, x-power, y-power)` triples; repeated monomials add.
    pub fn new(terms: &[(f64, u32, u32)]) -> Self {
        let mut map = BTreeMap::new();
        for &(c, i, j) in terms {
            *map.entry((i, j)).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        Self { terms: map }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::new(&[(c, 0, 0)])
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c * p[0].powi(i as i32) * p[1].powi(j as i32))
            .sum()
    }

    pub fn dx(&self) -> Self {
        let t: Vec<_> = self
            .terms
            .iter()
            .filter(|(&(i, _), _)| i > 0)
            .map(|(&(i, j), &c)| (c * f64::from(i), i - 1, j))
            .collect();
        Self::new(&t)
    }

    pub fn dy(&self) -> Self {
        let t: Vec<_> = self
            .terms
            .iter()
            .filter(|(&(_, j), _)| j > 0)
            .map(|(&(i, j), &c)| (c * f64::from(j), i, j - 1))
            .collect();
        Self::new(&t)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (&(i, j), &c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            match i {
                0 => {}
                1 => write!(f, "·x")?,
                _ => write!(f, "·x^{i}")?,
            }
            match j {
                0 => {}
                1 => write!(f, "·y")?,
                _ => write!(f, "·y^{j}")?,
            }
        }
        Ok(())
    }
}

/// Symmetric stress field `[[xx, xy], [xy, yy]]` with polynomial entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StressPoly {
    pub xx: Poly,
    pub yy: Poly,
    pub xy: Poly,
}

impl StressPoly {
    pub fn eval(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let xy = self.xy.eval(p);
        [[self.xx.eval(p), xy], [xy, self.yy.eval(p)]]
    }

    /// Row-wise divergence.
    pub fn div(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.xx.dx().eval(p) + self.xy.dy().eval(p),
            self.xy.dx().eval(p) + self.yy.dy().eval(p),
        ]
    }

    pub fn degree(&self) -> u32 {
        self.xx.degree().max(self.yy.degree()).max(self.xy.degree())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementPoly {
    pub x: Poly,
    pub y: Poly,
}

impl DisplacementPoly {
    pub fn eval(&self, p: [f64; 2]) -> [f64; 2] {
        [self.x.eval(p), self.y.eval(p)]
    }

    /// Symmetric gradient as a 2×2 matrix.
    pub fn strain(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let shear = 0.5 * (self.x.dy().eval(p) + self.y.dx().eval(p));
        [[self.x.dx().eval(p), shear], [shear, self.y.dy().eval(p)]]
    }

    pub fn degree(&self) -> u32 {
        self.x.degree().max(self.y.degree())
    }
}
