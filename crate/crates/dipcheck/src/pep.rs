//! Piecewise exponential-polynomial functions: finitely many breakpoints,
//! and on each interval a sum of terms `c * x^m * e^{b*x}`. The class is
//! closed under pointwise addition, multiplication, argument shift, clamping
//! to an interval, and definite/indefinite integration, which is exactly the
//! closure needed to evaluate path probabilities.
//!
//! Per-piece exponents are anchored (`c * x^m * e^{b*(x - anchor)}`) so that
//! large |b * x| products cannot overflow while a piece is being manipulated.

use std::fmt;

use thiserror::Error;

/// Relative tolerance under which two exponent rates are treated as equal.
/// Rates arise as signed sums of the same `d * eps` products, so genuine
/// collisions are exact or within a few ulps.
const RATE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum PepError {
    #[error("integral of a non-decaying tail toward {0} diverges")]
    DivergentTail(f64),
}

/// One summand `coeff * x^degree * e^{rate * (x - anchor)}`; the anchor is
/// owned by the enclosing piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub degree: u32,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    anchor: f64,
    terms: Vec<Term>,
}

impl Piece {
    fn zero(anchor: f64) -> Self {
        Piece {
            anchor,
            terms: Vec::new(),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * powi(x, t.degree) * (t.rate * (x - self.anchor)).exp())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseExpPoly {
    /// Strictly increasing finite breakpoints; `pieces[i]` covers
    /// `(breaks[i-1], breaks[i])` with implicit `-inf`/`+inf` sentinels.
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
}

fn powi(x: f64, n: u32) -> f64 {
    x.powi(n as i32)
}

/// Midpoint-ish anchor for the interval (lo, hi), holding to finite values.
fn anchor_for(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}

impl PiecewiseExpPoly {
    pub fn zero() -> Self {
        PiecewiseExpPoly {
            breaks: Vec::new(),
            pieces: vec![Piece::zero(0.0)],
        }
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        PiecewiseExpPoly {
            breaks: Vec::new(),
            pieces: vec![Piece {
                anchor: 0.0,
                terms: vec![Term {
                    coeff: c,
                    degree: 0,
                    rate: 0.0,
                }],
            }],
        }
    }

    /// Builds a function from explicit breakpoints and per-piece terms, with
    /// each piece's terms interpreted relative to the given anchor.
    pub fn from_pieces(breaks: Vec<f64>, pieces: Vec<(f64, Vec<Term>)>) -> Self {
        assert_eq!(pieces.len(), breaks.len() + 1);
        assert!(breaks.windows(2).all(|w| w[0] < w[1]));
        let mut result = PiecewiseExpPoly {
            breaks,
            pieces: pieces
                .into_iter()
                .map(|(anchor, terms)| Piece { anchor, terms })
                .collect(),
        };
        result.simplify();
        result
    }

    /// Density of a Laplace distribution with rate `k` and mean `nu`:
    /// `(k/2) e^{-k |x - nu|}`.
    pub fn laplace_pdf(k: f64, nu: f64) -> Self {
        assert!(k > 0.0, "laplace rate must be positive");
        PiecewiseExpPoly {
            breaks: vec![nu],
            pieces: vec![
                Piece {
                    anchor: nu,
                    terms: vec![Term {
                        coeff: k / 2.0,
                        degree: 0,
                        rate: k,
                    }],
                },
                Piece {
                    anchor: nu,
                    terms: vec![Term {
                        coeff: k / 2.0,
                        degree: 0,
                        rate: -k,
                    }],
                },
            ],
        }
    }

    fn bounds(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 {
            f64::NEG_INFINITY
        } else {
            self.breaks[i - 1]
        };
        let hi = if i == self.breaks.len() {
            f64::INFINITY
        } else {
            self.breaks[i]
        };
        (lo, hi)
    }

    fn piece_index(&self, x: f64) -> usize {
        self.breaks.partition_point(|&b| b <= x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// Drops negligible terms, merges terms with equal degree and
    /// indistinguishable rates, and snaps near-zero rates to exactly zero.
    fn simplify(&mut self) {
        let scale = self
            .pieces
            .iter()
            .flat_map(|p| p.terms.iter())
            .map(|t| t.rate.abs())
            .fold(0.0f64, f64::max);
        let rate_tol = RATE_REL_TOL * scale.max(1.0);
        for piece in &mut self.pieces {
            for t in &mut piece.terms {
                if t.rate.abs() <= rate_tol {
                    t.rate = 0.0;
                }
            }
            piece
                .terms
                .sort_by(|a, b| (a.degree, a.rate).partial_cmp(&(b.degree, b.rate)).unwrap());
            let mut merged: Vec<Term> = Vec::with_capacity(piece.terms.len());
            for t in piece.terms.drain(..) {
                match merged.last_mut() {
                    Some(last)
                        if last.degree == t.degree
                            && (last.rate - t.rate).abs()
                                <= rate_tol.max(RATE_REL_TOL * last.rate.abs()) =>
                    {
                        last.coeff += t.coeff;
                    }
                    _ => merged.push(t),
                }
            }
            merged.retain(|t| t.coeff != 0.0);
            piece.terms = merged;
        }
    }

    fn binary_op(&self, other: &Self, mul: bool) -> Self {
        let mut breaks: Vec<f64> = self
            .breaks
            .iter()
            .chain(other.breaks.iter())
            .copied()
            .collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let mut pieces = Vec::with_capacity(breaks.len() + 1);
        for i in 0..=breaks.len() {
            let lo = if i == 0 { f64::NEG_INFINITY } else { breaks[i - 1] };
            let hi = if i == breaks.len() { f64::INFINITY } else { breaks[i] };
            let probe = probe_point(lo, hi);
            let anchor = anchor_for(lo, hi);
            let pa = &self.pieces[self.piece_index(probe)];
            let pb = &other.pieces[other.piece_index(probe)];
            let mut terms = Vec::new();
            if mul {
                for ta in &pa.terms {
                    for tb in &pb.terms {
                        let rate = ta.rate + tb.rate;
                        let coeff = ta.coeff
                            * tb.coeff
                            * (ta.rate * (anchor - pa.anchor)).exp()
                            * (tb.rate * (anchor - pb.anchor)).exp();
                        terms.push(Term {
                            coeff,
                            degree: ta.degree + tb.degree,
                            rate,
                        });
                    }
                }
            } else {
                for src in [pa, pb] {
                    for t in &src.terms {
                        terms.push(Term {
                            coeff: t.coeff * (t.rate * (anchor - src.anchor)).exp(),
                            degree: t.degree,
                            rate: t.rate,
                        });
                    }
                }
            }
            pieces.push(Piece { anchor, terms });
        }
        let mut result = PiecewiseExpPoly { breaks, pieces };
        result.simplify();
        result
    }

    pub fn add(&self, other: &Self) -> Self {
        self.binary_op(other, false)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.binary_op(other, true)
    }

    /// Argument shift: returns `g` with `g(x) = f(x + c)`.
    pub fn shift(&self, c: f64) -> Self {
        let breaks = self.breaks.iter().map(|b| b - c).collect();
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut terms = Vec::new();
                for t in &p.terms {
                    // (x + c)^m expanded into powers of x.
                    let mut binom = 1.0f64;
                    for k in (0..=t.degree).rev() {
                        terms.push(Term {
                            coeff: t.coeff * binom * powi(c, t.degree - k),
                            degree: k,
                            rate: t.rate,
                        });
                        if k > 0 {
                            binom = binom * k as f64 / (t.degree - k + 1) as f64;
                        }
                    }
                }
                Piece {
                    anchor: p.anchor - c,
                    terms,
                }
            })
            .collect();
        let mut result = PiecewiseExpPoly { breaks, pieces };
        result.simplify();
        result
    }

    /// Restriction to (lo, hi): zero outside, unchanged inside.
    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        assert!(lo < hi);
        let mut breaks: Vec<f64> = self.breaks.clone();
        for b in [lo, hi] {
            if b.is_finite() && !breaks.contains(&b) {
                breaks.push(b);
            }
        }
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut pieces = Vec::with_capacity(breaks.len() + 1);
        for i in 0..=breaks.len() {
            let plo = if i == 0 { f64::NEG_INFINITY } else { breaks[i - 1] };
            let phi = if i == breaks.len() { f64::INFINITY } else { breaks[i] };
            let probe = probe_point(plo, phi);
            if probe < lo || probe > hi {
                pieces.push(Piece::zero(anchor_for(plo, phi)));
            } else {
                pieces.push(self.pieces[self.piece_index(probe)].clone());
            }
        }
        let mut result = PiecewiseExpPoly { breaks, pieces };
        result.simplify();
        result
    }

    /// Antiderivative terms of one piece, as (terms, uses_same_anchor).
    /// For `rate != 0`: integral of `c x^m e^{b(x-a)}` is
    /// `e^{b(x-a)} * sum_{k<=m} c (-1)^{m-k} (m!/k!) b^{k-m-1} x^k`.
    /// For `rate == 0`: power rule.
    fn antiderivative_terms(piece: &Piece) -> Vec<Term> {
        let mut out = Vec::new();
        for t in &piece.terms {
            if t.rate == 0.0 {
                out.push(Term {
                    coeff: t.coeff / (t.degree as f64 + 1.0),
                    degree: t.degree + 1,
                    rate: 0.0,
                });
            } else {
                let mut factor = 1.0 / t.rate;
                for k in (0..=t.degree).rev() {
                    out.push(Term {
                        coeff: t.coeff * factor,
                        degree: k,
                        rate: t.rate,
                    });
                    if k > 0 {
                        factor *= -(k as f64) / t.rate;
                    }
                }
            }
        }
        out
    }

    /// Limit of the antiderivative at an infinite endpoint; `None` when the
    /// tail diverges.
    fn antiderivative_tail_limit(terms: &[Term], toward_pos_inf: bool) -> Option<f64> {
        for t in terms {
            if t.coeff == 0.0 {
                continue;
            }
            let decays = if toward_pos_inf { t.rate < 0.0 } else { t.rate > 0.0 };
            if !decays {
                return None;
            }
        }
        Some(0.0)
    }

    fn eval_terms(terms: &[Term], anchor: f64, x: f64) -> f64 {
        terms
            .iter()
            .map(|t| t.coeff * powi(x, t.degree) * (t.rate * (x - anchor)).exp())
            .sum()
    }

    /// Definite integral over (lo, hi); infinite limits allowed when the
    /// corresponding tail decays.
    pub fn integrate(&self, lo: f64, hi: f64) -> Result<f64, PepError> {
        if lo >= hi {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for i in 0..self.pieces.len() {
            let (plo, phi) = self.bounds(i);
            let a = plo.max(lo);
            let b = phi.min(hi);
            if a >= b {
                continue;
            }
            let piece = &self.pieces[i];
            let anti = Self::antiderivative_terms(piece);
            let upper = if b.is_finite() {
                Self::eval_terms(&anti, piece.anchor, b)
            } else {
                Self::antiderivative_tail_limit(&anti, true)
                    .ok_or(PepError::DivergentTail(f64::INFINITY))?
            };
            let lower = if a.is_finite() {
                Self::eval_terms(&anti, piece.anchor, a)
            } else {
                Self::antiderivative_tail_limit(&anti, false)
                    .ok_or(PepError::DivergentTail(f64::NEG_INFINITY))?
            };
            total += upper - lower;
        }
        Ok(total)
    }

    /// Cumulative integral `x -> integral of f over (-inf, x]`.
    pub fn integrate_lower(&self) -> Result<Self, PepError> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut running = 0.0f64;
        for i in 0..self.pieces.len() {
            let (lo, hi) = self.bounds(i);
            let piece = &self.pieces[i];
            let anti = Self::antiderivative_terms(piece);
            let at_lo = if lo.is_finite() {
                Self::eval_terms(&anti, piece.anchor, lo)
            } else {
                Self::antiderivative_tail_limit(&anti, false)
                    .ok_or(PepError::DivergentTail(f64::NEG_INFINITY))?
            };
            let mut terms = anti.clone();
            terms.push(Term {
                coeff: running - at_lo,
                degree: 0,
                rate: 0.0,
            });
            pieces.push(Piece {
                anchor: piece.anchor,
                terms,
            });
            if hi.is_finite() {
                running += Self::eval_terms(&anti, piece.anchor, hi) - at_lo;
            }
        }
        let mut result = PiecewiseExpPoly {
            breaks: self.breaks.clone(),
            pieces,
        };
        result.simplify();
        Ok(result)
    }

    /// Survival integral `x -> integral of f over [x, inf)`.
    pub fn integrate_upper(&self) -> Result<Self, PepError> {
        let mut pieces = vec![Piece::zero(0.0); self.pieces.len()];
        let mut running = 0.0f64;
        for i in (0..self.pieces.len()).rev() {
            let (lo, hi) = self.bounds(i);
            let piece = &self.pieces[i];
            let anti = Self::antiderivative_terms(piece);
            let at_hi = if hi.is_finite() {
                Self::eval_terms(&anti, piece.anchor, hi)
            } else {
                Self::antiderivative_tail_limit(&anti, true)
                    .ok_or(PepError::DivergentTail(f64::INFINITY))?
            };
            let mut terms: Vec<Term> = anti
                .iter()
                .map(|t| Term {
                    coeff: -t.coeff,
                    degree: t.degree,
                    rate: t.rate,
                })
                .collect();
            terms.push(Term {
                coeff: running + at_hi,
                degree: 0,
                rate: 0.0,
            });
            pieces[i] = Piece {
                anchor: piece.anchor,
                terms,
            };
            if lo.is_finite() {
                running += at_hi - Self::eval_terms(&anti, piece.anchor, lo);
            }
        }
        let mut result = PiecewiseExpPoly {
            breaks: self.breaks.clone(),
            pieces,
        };
        result.simplify();
        Ok(result)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.pieces {
            for t in &mut p.terms {
                t.coeff *= c;
            }
        }
        out.simplify();
        out
    }

    /// Rough size measure used in tests and debugging.
    pub fn term_count(&self) -> usize {
        self.pieces.iter().map(|p| p.terms.len()).sum()
    }
}

impl fmt::Display for PiecewiseExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.pieces.len() {
            let (lo, hi) = self.bounds(i);
            write!(f, "({lo}, {hi}): ")?;
            let piece = &self.pieces[i];
            if piece.terms.is_empty() {
                write!(f, "0")?;
            }
            for (j, t) in piece.terms.iter().enumerate() {
                if j > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "{}", t.coeff)?;
                if t.degree > 0 {
                    write!(f, "*x^{}", t.degree)?;
                }
                if t.rate != 0.0 {
                    write!(f, "*e^({}*(x-{}))", t.rate, piece.anchor)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn probe_point(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap(k: f64, nu: f64) -> PiecewiseExpPoly {
        PiecewiseExpPoly::laplace_pdf(k, nu)
    }

    #[test]
    fn unit_density_integrates_to_one() {
        let f = lap(1.0, 0.0);
        let total = f.integrate(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((total - 1.0).abs() < 1e-14, "{total}");
    }

    #[test]
    fn gamma_two_integral() {
        // integral over (0, inf) of x e^{-x} dx = 1
        let f = PiecewiseExpPoly::from_pieces(
            vec![0.0],
            vec![
                (0.0, vec![]),
                (
                    0.0,
                    vec![Term {
                        coeff: 1.0,
                        degree: 1,
                        rate: -1.0,
                    }],
                ),
            ],
        );
        let total = f.integrate(0.0, f64::INFINITY).unwrap();
        assert!((total - 1.0).abs() < 1e-14, "{total}");
    }

    #[test]
    fn divergent_tail_is_reported() {
        let f = PiecewiseExpPoly::constant(1.0);
        assert_eq!(
            f.integrate(0.0, f64::INFINITY),
            Err(PepError::DivergentTail(f64::INFINITY))
        );
        assert!(f.integrate(0.0, 5.0).is_ok());
        assert!(f.integrate_lower().is_err());
    }

    #[test]
    fn add_and_mul_are_pointwise() {
        let f = lap(0.7, -0.3);
        let g = lap(1.3, 0.9);
        let sum = f.add(&g);
        let prod = f.mul(&g);
        for x in [-5.0, -0.3, -0.1, 0.0, 0.4, 0.9, 2.0, 17.0] {
            assert!((sum.eval(x) - (f.eval(x) + g.eval(x))).abs() < 1e-14);
            assert!((prod.eval(x) - f.eval(x) * g.eval(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_moves_the_argument() {
        let f = lap(1.0, 0.5);
        let g = f.shift(2.0);
        for x in [-4.0, -1.5, 0.0, 0.3, 1.0] {
            assert!((g.eval(x) - f.eval(x + 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn integral_splits_additively() {
        let f = lap(0.9, 0.2).mul(&lap(1.4, -1.0));
        let (a, b, c) = (-2.5, 0.1, 3.0);
        let whole = f.integrate(a, c).unwrap();
        let parts = f.integrate(a, b).unwrap() + f.integrate(b, c).unwrap();
        assert!((whole - parts).abs() < 1e-15, "{whole} vs {parts}");
    }

    #[test]
    fn cumulative_integrals_match_definite() {
        let f = lap(1.1, 0.4);
        let lower = f.integrate_lower().unwrap();
        let upper = f.integrate_upper().unwrap();
        for x in [-3.0, 0.0, 0.4, 1.7] {
            let expect_lo = f.integrate(f64::NEG_INFINITY, x).unwrap();
            let expect_hi = f.integrate(x, f64::INFINITY).unwrap();
            assert!((lower.eval(x) - expect_lo).abs() < 1e-14);
            assert!((upper.eval(x) - expect_hi).abs() < 1e-14);
            assert!((lower.eval(x) + upper.eval(x) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn clamp_zeroes_outside() {
        let f = lap(1.0, 0.0);
        let g = f.clamp(-1.0, 2.0);
        assert_eq!(g.eval(-1.5), 0.0);
        assert_eq!(g.eval(2.5), 0.0);
        assert!((g.eval(0.5) - f.eval(0.5)).abs() < 1e-15);
        let mass = g.integrate(f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let expect = f.integrate(-1.0, 2.0).unwrap();
        assert!((mass - expect).abs() < 1e-15);
    }

    #[test]
    fn product_of_densities_integrates_like_convolution_mass() {
        // integral of f1(x) * S2(x) where S2 is the survival of f2 equals
        // Pr[X1 <= X2]; cross-checked against the closed form in laplace.rs
        // via its own tests. Here only check it is a probability.
        let f1 = lap(1.0, 0.0);
        let s2 = lap(2.0, 1.0).integrate_upper().unwrap();
        let p = f1
            .mul(&s2)
            .integrate(f64::NEG_INFINITY, f64::INFINITY)
            .unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert!((p - 0.7773029197584739).abs() < 1e-12, "{p}");
    }

    #[test]
    fn degree_raising_products_integrate_exactly() {
        // (e^{-x})*(e^{-x}) on (0,inf) has colliding rates after cancel:
        // x * e^{-2x} appears once integrated twice.
        let e = PiecewiseExpPoly::from_pieces(
            vec![0.0],
            vec![
                (0.0, vec![]),
                (
                    0.0,
                    vec![Term {
                        coeff: 1.0,
                        degree: 0,
                        rate: -1.0,
                    }],
                ),
            ],
        );
        let prod = e.mul(&e); // e^{-2x} on (0, inf)
        let total = prod.integrate(0.0, f64::INFINITY).unwrap();
        assert!((total - 0.5).abs() < 1e-14);
        // Cumulative of x e^{-x}: 1 - (1+x)e^{-x}
        let xe = PiecewiseExpPoly::from_pieces(
            vec![0.0],
            vec![
                (0.0, vec![]),
                (
                    0.0,
                    vec![Term {
                        coeff: 1.0,
                        degree: 1,
                        rate: -1.0,
                    }],
                ),
            ],
        );
        let cum = xe.integrate_lower().unwrap();
        for x in [0.5f64, 1.0, 3.0] {
            let expect = 1.0 - (1.0 + x) * (-x).exp();
            assert!((cum.eval(x) - expect).abs() < 1e-14);
        }
    }
}
