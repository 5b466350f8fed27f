//! Control signals: piecewise-constant functions, Radon measures made of a
//! piecewise-constant density plus finitely many atoms, and the constructions
//! that move between the two classes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::compensated_sum;

/// `u = Σ u_j 1_{[t_{j-1}, t_j)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseConstantControl {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantControl {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::arg(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            )));
        }
        if breakpoints.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::arg("control breakpoints and values must be finite"));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::arg("control breakpoints must be strictly increasing"));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: f64, start: f64, end: f64) -> Result<Self> {
        Self::new(vec![start, end], vec![value])
    }

    /// Equal-length steps on `[start, end]`.
    pub fn uniform(start: f64, end: f64, values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m == 0 {
            return Err(Error::arg("uniform control needs at least one value"));
        }
        let h = (end - start) / m as f64;
        let mut bp: Vec<f64> = (0..m).map(|j| start + j as f64 * h).collect();
        bp.push(end);
        Self::new(bp, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    /// `(t_{j-1}, t_j, u_j)` triples.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(self.values.iter())
            .map(|(w, &u)| (w[0], w[1], u))
    }

    pub fn l1_norm(&self) -> f64 {
        compensated_sum(self.pieces().map(|(a, b, u)| u.abs() * (b - a)))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|u| u.abs()).fold(0.0, f64::max)
    }

    /// Value at `t`, using the right-continuous convention; zero outside.
    pub fn value_at(&self, t: f64) -> f64 {
        self.pieces()
            .find(|&(a, b, _)| a <= t && t < b)
            .map_or(0.0, |(_, _, u)| u)
    }

    /// `∫_{start}^{t} u`, clamped to the support.
    pub fn integral_to(&self, t: f64) -> f64 {
        compensated_sum(self.pieces().map(|(a, b, u)| {
            if t <= a {
                0.0
            } else {
                u * (t.min(b) - a)
            }
        }))
    }

    /// Multiply every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|u| u * factor).collect(),
        }
    }

    /// Shift all breakpoints by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().map(|t| t + dt).collect(),
            values: self.values.clone(),
        }
    }

    /// Append `other`, which must start where `self` ends.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if other.start() != self.end() {
            return Err(Error::arg(format!(
                "cannot concatenate control ending at {} with one starting at {}",
                self.end(),
                other.start()
            )));
        }
        let mut bp = self.breakpoints.clone();
        bp.extend_from_slice(&other.breakpoints[1..]);
        let mut vals = self.values.clone();
        vals.extend_from_slice(&other.values);
        Self::new(bp, vals)
    }

    /// `self` repeated `count` times back to back.
    pub fn repeated(&self, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::arg("repeat count must be positive"));
        }
        let period = self.end() - self.start();
        let m = self.values.len();
        let mut bp = Vec::with_capacity(count * m + 1);
        let mut vals = Vec::with_capacity(count * m);
        for r in 0..count {
            let offset = r as f64 * period;
            let from = if r == 0 { 0 } else { 1 };
            bp.extend(self.breakpoints[from..].iter().map(|t| t + offset));
            vals.extend_from_slice(&self.values);
        }
        Self::new(bp, vals)
    }

    /// Merge equal neighbours and drop zero-length pieces.
    pub fn normalized(&self) -> Self {
        let mut bp = vec![self.start()];
        let mut vals: Vec<f64> = Vec::new();
        for (a, b, u) in self.pieces() {
            if b <= a {
                continue;
            }
            match vals.last() {
                Some(&last) if last == u => *bp.last_mut().unwrap() = b,
                _ => {
                    vals.push(u);
                    bp.push(b);
                }
            }
        }
        if vals.is_empty() {
            return self.clone();
        }
        Self {
            breakpoints: bp,
            values: vals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub t: f64,
    pub w: f64,
}

/// Signed control measure on `(0, T]`: density plus atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadonControl {
    #[serde(rename = "T")]
    horizon: f64,
    density: PiecewiseConstantControl,
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadonControlRecord {
    #[serde(rename = "T")]
    horizon: f64,
    #[serde(default)]
    density: Option<PiecewiseConstantControl>,
    #[serde(default)]
    atoms: Vec<Atom>,
}

impl<'de> Deserialize<'de> for RadonControl {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = RadonControlRecord::deserialize(d)?;
        let density = match rec.density {
            Some(p) => {
                PiecewiseConstantControl::new(p.breakpoints, p.values).map_err(serde::de::Error::custom)?
            }
            None => PiecewiseConstantControl::constant(0.0, 0.0, rec.horizon).map_err(serde::de::Error::custom)?,
        };
        RadonControl::new(rec.horizon, density, rec.atoms).map_err(serde::de::Error::custom)
    }
}

/// One factor of a propagation: free flow at a constant level, or a kick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Flow { u: f64, start: f64, end: f64 },
    Kick { w: f64, t: f64 },
}

impl RadonControl {
    pub fn new(horizon: f64, density: PiecewiseConstantControl, atoms: Vec<Atom>) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::arg(format!("horizon must be positive and finite, got {horizon}")));
        }
        if density.start() != 0.0 || density.end() != horizon {
            return Err(Error::arg(format!(
                "density must span [0, {horizon}], got [{}, {}]",
                density.start(),
                density.end()
            )));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !a.t.is_finite() || !a.w.is_finite() {
                return Err(Error::arg("atom times and weights must be finite"));
            }
            if !(a.t > 0.0 && a.t <= horizon) {
                return Err(Error::arg(format!("atom time {} outside (0, {horizon}]", a.t)));
            }
            if i > 0 && !(atoms[i - 1].t < a.t) {
                return Err(Error::arg("atom times must be strictly increasing"));
            }
        }
        Ok(Self {
            horizon,
            density,
            atoms,
        })
    }

    pub fn zero(horizon: f64) -> Result<Self> {
        Self::new(horizon, PiecewiseConstantControl::constant(0.0, 0.0, horizon)?, vec![])
    }

    /// Pure density control; the density must start at 0.
    pub fn from_density(density: PiecewiseConstantControl) -> Result<Self> {
        let t = density.end();
        Self::new(t, density, vec![])
    }

    pub fn single_atom(horizon: f64, t: f64, w: f64) -> Result<Self> {
        Self::new(
            horizon,
            PiecewiseConstantControl::constant(0.0, 0.0, horizon)?,
            vec![Atom { t, w }],
        )
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn density(&self) -> &PiecewiseConstantControl {
        &self.density
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `|u|((0,T]) = ∫|density| + Σ|w_i|`.
    pub fn total_variation(&self) -> f64 {
        compensated_sum(
            self.density
                .pieces()
                .map(|(a, b, u)| u.abs() * (b - a))
                .chain(self.atoms.iter().map(|a| a.w.abs())),
        )
    }

    /// `u((0,t])`: right-continuous, zero at `t = 0`.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::arg(format!("time {t} outside [0, {}]", self.horizon)));
        }
        Ok(self.cumulative_unchecked(t))
    }

    pub(crate) fn cumulative_unchecked(&self, t: f64) -> f64 {
        compensated_sum(
            std::iter::once(self.density.integral_to(t)).chain(self.atoms.iter().filter(|a| a.t <= t).map(|a| a.w)),
        )
    }

    pub fn trace(&self, times: &[f64]) -> Result<CumulativeTrace> {
        let values = times.iter().map(|&t| self.cumulative(t)).collect::<Result<Vec<_>>>()?;
        Ok(CumulativeTrace {
            times: times.to_vec(),
            values,
        })
    }

    /// Factor sequence in time order: flows over density pieces, each atom
    /// kick placed right after the flow reaching its time.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut atoms = self.atoms.iter().peekable();
        for (a, b, u) in self.density.pieces() {
            let mut start = a;
            while let Some(atom) = atoms.peek() {
                if atom.t < b {
                    if atom.t > start {
                        out.push(Segment::Flow { u, start, end: atom.t });
                        start = atom.t;
                    }
                    out.push(Segment::Kick { w: atom.w, t: atom.t });
                    atoms.next();
                } else {
                    break;
                }
            }
            out.push(Segment::Flow { u, start, end: b });
        }
        // Atoms at the final time.
        for atom in atoms {
            out.push(Segment::Kick { w: atom.w, t: atom.t });
        }
        out
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Samples of `t ↦ u((0,t])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeTrace {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl CumulativeTrace {
    pub fn bv_seminorm(&self) -> f64 {
        compensated_sum(self.values.windows(2).map(|w| (w[1] - w[0]).abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("time,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(s, "{t:?},{v:?}");
        }
        s
    }
}

/// Piecewise-constant approximation of a Radon control: atoms become
/// rectangular spikes ending at the atom, of width `min(T/n, gap)` where the
/// gap is half the distance to the previous atom (or the distance to 0 for the
/// first one), and the density is kept.
pub fn approximate_by_piecewise(u: &RadonControl, n: usize) -> Result<PiecewiseConstantControl> {
    if n == 0 {
        return Err(Error::arg("refinement must be at least 1"));
    }
    if u.atoms.is_empty() {
        return Ok(u.density.clone());
    }
    let t_max = u.horizon / n as f64;
    let spikes: Vec<(f64, f64, f64)> = u
        .atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let gap = if i == 0 { a.t } else { 0.5 * (a.t - u.atoms[i - 1].t) };
            let width = t_max.min(gap);
            (a.t - width, a.t, a.w / width)
        })
        .collect();
    let mut cuts: Vec<f64> = u.density.breakpoints.clone();
    for &(a, b, _) in &spikes {
        cuts.push(a);
        cuts.push(b);
    }
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let values = cuts
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let spike = spikes
                .iter()
                .find(|&&(a, b, _)| a <= mid && mid < b)
                .map_or(0.0, |s| s.2);
            u.density.value_at(mid) + spike
        })
        .collect();
    PiecewiseConstantControl::new(cuts, values)
}

/// Width-`1/n`, height-`n·w` pulse ending at `τ`, zero elsewhere on `[0, T]`.
pub fn spike_sequence(atom: Atom, n: usize, horizon: f64) -> Result<PiecewiseConstantControl> {
    if n == 0 {
        return Err(Error::arg("refinement must be at least 1"));
    }
    if !(atom.t > 0.0 && atom.t <= horizon) {
        return Err(Error::arg(format!("atom time {} outside (0, {horizon}]", atom.t)));
    }
    let width = 1.0 / n as f64;
    let start = atom.t - width;
    if start < 0.0 {
        return Err(Error::arg(format!(
            "spike of width {width} ending at {} does not fit after time 0",
            atom.t
        )));
    }
    let height = n as f64 * atom.w;
    let mut bp = Vec::with_capacity(4);
    let mut vals = Vec::with_capacity(3);
    if start > 0.0 {
        bp.push(0.0);
        vals.push(0.0);
    }
    bp.push(start);
    vals.push(height);
    bp.push(atom.t);
    if atom.t < horizon {
        vals.push(0.0);
        bp.push(horizon);
    }
    PiecewiseConstantControl::new(bp, vals)
}

/// Signed masses `(positive, negative)` of `u` on `(a, b]`, with the atoms at
/// `b` included.
fn cell_masses(u: &RadonControl, a: f64, b: f64) -> (f64, f64) {
    let mut pos = 0.0;
    let mut neg = 0.0;
    for (p, q, v) in u.density.pieces() {
        let len = q.min(b) - p.max(a);
        if len > 0.0 {
            if v > 0.0 {
                pos += v * len;
            } else {
                neg -= v * len;
            }
        }
    }
    for atom in &u.atoms {
        if atom.t > a && atom.t <= b {
            if atom.w > 0.0 {
                pos += atom.w;
            } else {
                neg -= atom.w;
            }
        }
    }
    (pos, neg)
}

/// Chattering approximation taking only the values `{a, 0, b}` (when
/// `a < 0 < b`), `{0, b}` / `{a, 0}` (when one level is zero), or `{a, b}`
/// (levels of equal sign).
///
/// `[0, T]` is cut into `n` cells. With a zero level available, each cell's
/// positive and negative masses are emitted as one pulse at `b` and one at
/// `a`, padded with zeros; a cell is dilated when its pulses do not fit, so the
/// returned horizon can exceed `T`. With two same-sign levels, each cell is
/// split between `a` and `b` so that its mean matches the cell mean of `u`.
pub fn bang_bang_approximate(u: &RadonControl, a: f64, b: f64, n: usize) -> Result<PiecewiseConstantControl> {
    if n == 0 {
        return Err(Error::arg("refinement must be at least 1"));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::arg(format!("infeasible level set: need a < b, got a = {a}, b = {b}")));
    }
    let h = u.horizon / n as f64;
    let mut bp = vec![0.0];
    let mut vals = Vec::new();
    let mut push = |value: f64, end: f64| {
        if end > *bp.last().unwrap() {
            bp.push(end);
            vals.push(value);
        }
    };
    // Extra time inserted by dilated cells so far.
    let mut offset = 0.0;
    for i in 0..n {
        let lo = i as f64 * h;
        let hi = if i + 1 == n { u.horizon } else { (i + 1) as f64 * h };
        let (pos, neg) = cell_masses(u, lo, hi);
        let cell = hi - lo;
        let s = lo + offset;
        if a <= 0.0 && b >= 0.0 {
            if pos > 0.0 && b == 0.0 {
                return Err(Error::arg("control has positive mass but the level set has no positive level"));
            }
            if neg > 0.0 && a == 0.0 {
                return Err(Error::arg("control has negative mass but the level set has no negative level"));
            }
            let dp = if pos > 0.0 { pos / b } else { 0.0 };
            let dn = if neg > 0.0 { neg / -a } else { 0.0 };
            if dp + dn > cell {
                offset += dp + dn - cell;
            }
            push(b, s + dp);
            push(a, s + dp + dn);
            push(0.0, hi + offset);
        } else {
            let mean = (pos - neg) / cell;
            if mean < a || mean > b {
                return Err(Error::arg(format!(
                    "cell mean {mean} outside the level interval [{a}, {b}]; translate the drift by (a+b)/2 B first"
                )));
            }
            let theta = (mean - a) / (b - a);
            push(b, s + theta * cell);
            push(a, hi + offset);
        }
    }
    Ok(PiecewiseConstantControl::new(bp, vals)?.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_atom() -> RadonControl {
        RadonControl::single_atom(1.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn total_variation_examples() {
        assert_eq!(RadonControl::zero(1.0).unwrap().total_variation(), 0.0);
        assert_eq!(RadonControl::single_atom(1.0, 0.5, -3.0).unwrap().total_variation(), 3.0);
        let u = RadonControl::new(
            1.0,
            PiecewiseConstantControl::constant(2.0, 0.0, 1.0).unwrap(),
            vec![Atom { t: 0.3, w: 1.0 }],
        )
        .unwrap();
        assert_eq!(u.total_variation(), 3.0);
    }

    #[test]
    fn cumulative_examples() {
        let u = unit_atom();
        assert_eq!(u.cumulative(0.0).unwrap(), 0.0);
        assert_eq!(u.cumulative(0.5).unwrap(), 1.0);
        assert_eq!(u.cumulative(0.4999).unwrap(), 0.0);
        let d = RadonControl::from_density(PiecewiseConstantControl::constant(2.0, 0.0, 1.0).unwrap()).unwrap();
        assert_eq!(d.cumulative(0.25).unwrap(), 0.5);
        assert!(d.cumulative(1.5).is_err());
        assert!(d.cumulative(-0.1).is_err());
    }

    #[test]
    fn validation() {
        assert!(PiecewiseConstantControl::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(PiecewiseConstantControl::new(vec![0.0, 1.0], vec![f64::NAN]).is_err());
        assert!(PiecewiseConstantControl::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(RadonControl::single_atom(1.0, 0.0, 1.0).is_err());
        assert!(RadonControl::single_atom(1.0, 1.0, 1.0).is_ok());
        let bad = RadonControl::new(
            1.0,
            PiecewiseConstantControl::constant(0.0, 0.0, 1.0).unwrap(),
            vec![Atom { t: 0.5, w: 1.0 }, Atom { t: 0.5, w: 1.0 }],
        );
        assert!(bad.is_err());
        assert!(RadonControl::new(2.0, PiecewiseConstantControl::constant(0.0, 0.0, 1.0).unwrap(), vec![]).is_err());
    }

    #[test]
    fn json_shape() {
        let text = r#"{"T":1.0,"density":{"breakpoints":[0.0,0.5,1.0],"values":[1.0,-2.0]},"atoms":[{"t":0.75,"w":0.5}]}"#;
        let u = RadonControl::from_json(text).unwrap();
        assert_eq!(u.total_variation(), 2.0);
        assert_eq!(RadonControl::from_json(&u.to_json().unwrap()).unwrap(), u);
        assert!(RadonControl::from_json(r#"{"T":1.0,"atoms":[{"t":2.0,"w":1}]}"#).is_err());
        assert!(RadonControl::from_json(r#"{"T":1.0,"bogus":1}"#).is_err());
        let z = RadonControl::from_json(r#"{"T":2.0}"#).unwrap();
        assert_eq!(z.total_variation(), 0.0);
    }

    #[test]
    fn segments_place_kicks_after_flow() {
        let u = RadonControl::new(
            1.0,
            PiecewiseConstantControl::new(vec![0.0, 0.5, 1.0], vec![1.0, 2.0]).unwrap(),
            vec![Atom { t: 0.25, w: 3.0 }, Atom { t: 0.5, w: 4.0 }, Atom { t: 1.0, w: 5.0 }],
        )
        .unwrap();
        let segs = u.segments();
        assert_eq!(
            segs,
            vec![
                Segment::Flow { u: 1.0, start: 0.0, end: 0.25 },
                Segment::Kick { w: 3.0, t: 0.25 },
                Segment::Flow { u: 1.0, start: 0.25, end: 0.5 },
                Segment::Kick { w: 4.0, t: 0.5 },
                Segment::Flow { u: 2.0, start: 0.5, end: 1.0 },
                Segment::Kick { w: 5.0, t: 1.0 },
            ]
        );
    }

    #[test]
    fn approximation_keeps_density_unchanged() {
        let d = PiecewiseConstantControl::new(vec![0.0, 0.3, 1.0], vec![1.0, -1.0]).unwrap();
        let u = RadonControl::from_density(d.clone()).unwrap();
        for n in [1, 5, 100] {
            assert_eq!(approximate_by_piecewise(&u, n).unwrap(), d);
        }
    }

    #[test]
    fn atom_becomes_spike() {
        let p = approximate_by_piecewise(&unit_atom(), 10).unwrap();
        assert_eq!(p.value_at(0.45), 10.0);
        assert_eq!(p.value_at(0.35), 0.0);
        assert_eq!(p.value_at(0.5), 0.0);
        assert!((p.l1_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn approximation_is_pointwise_not_uniform() {
        let u = unit_atom();
        let mut at_atom = Vec::new();
        for n in [10, 100, 1000] {
            let p = RadonControl::from_density(approximate_by_piecewise(&u, n).unwrap()).unwrap();
            // Fixed t away from the atom: exact for n large enough.
            for t in [0.1, 0.3, 0.6, 0.9, 1.0] {
                if (t - 0.5f64).abs() > 1.0 / n as f64 {
                    assert!((p.cumulative(t).unwrap() - u.cumulative(t).unwrap()).abs() < 1e-12);
                }
            }
            // Just before the atom the error stays at the full weight.
            let t = 0.5 - 0.5 / n as f64;
            at_atom.push((p.cumulative(t).unwrap() - u.cumulative(t).unwrap()).abs());
        }
        assert!(at_atom.iter().all(|&e| (e - 0.5).abs() < 1e-9));
    }

    #[test]
    fn crowded_atoms_shrink_to_half_gap() {
        let u = RadonControl::new(
            1.0,
            PiecewiseConstantControl::constant(0.0, 0.0, 1.0).unwrap(),
            vec![Atom { t: 0.5, w: 1.0 }, Atom { t: 0.52, w: -2.0 }],
        )
        .unwrap();
        let p = approximate_by_piecewise(&u, 4).unwrap();
        assert!((p.l1_norm() - 3.0).abs() < 1e-12);
        assert!((p.value_at(0.515) + 200.0).abs() < 1e-6);
    }

    #[test]
    fn spike_sequence_examples() {
        let s = spike_sequence(Atom { t: 1.0, w: 1.0 }, 1, 1.0).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 1.0]);
        assert_eq!(s.values(), &[1.0]);
        for n in [1, 3, 10, 1000] {
            let s = spike_sequence(Atom { t: 1.0, w: -2.5 }, n, 1.0).unwrap();
            assert!((s.l1_norm() - 2.5).abs() < 1e-12);
        }
        let s = spike_sequence(Atom { t: 0.5, w: 1.0 }, 1000, 1.0).unwrap();
        assert_eq!(s.integral_to(0.49), 0.0);
        assert!(spike_sequence(Atom { t: 0.5, w: 1.0 }, 1, 1.0).is_err());
    }

    #[test]
    fn bang_bang_examples() {
        let b = 2.0;
        let u = RadonControl::from_density(PiecewiseConstantControl::constant(b, 0.0, 1.0).unwrap()).unwrap();
        let p = bang_bang_approximate(&u, -1.0, b, 8).unwrap();
        assert_eq!(p, PiecewiseConstantControl::constant(b, 0.0, 1.0).unwrap());

        let one = RadonControl::from_density(PiecewiseConstantControl::constant(1.0, 0.0, 1.0).unwrap()).unwrap();
        let p = bang_bang_approximate(&one, 0.0, 2.0, 10).unwrap();
        assert!(p.values().iter().all(|&v| v == 0.0 || v == 2.0));
        let on: f64 = p.pieces().filter(|p| p.2 == 2.0).map(|(a, b, _)| b - a).sum();
        assert!((on - 0.5).abs() < 1e-12);
        assert!((p.l1_norm() - 1.0).abs() < 1e-12);
        assert_eq!(p.end(), 1.0);
    }

    #[test]
    fn bang_bang_preserves_total_variation() {
        let u = RadonControl::new(
            1.0,
            PiecewiseConstantControl::new(vec![0.0, 0.3, 0.7, 1.0], vec![1.5, -0.5, 0.25]).unwrap(),
            vec![Atom { t: 0.4, w: -0.75 }],
        )
        .unwrap();
        for n in [1, 7, 64] {
            let p = bang_bang_approximate(&u, -4.0, 4.0, n).unwrap();
            assert!(p.values().iter().all(|&v| v == -4.0 || v == 0.0 || v == 4.0));
            assert!((p.l1_norm() - u.total_variation()).abs() < 1e-12);
        }
        // Levels too small for the atom: the horizon dilates.
        let p = bang_bang_approximate(&u, -0.5, 0.5, 10).unwrap();
        assert!(p.end() > 1.0);
        assert!((p.l1_norm() - u.total_variation()).abs() < 1e-12);
    }

    #[test]
    fn bang_bang_errors() {
        let u = RadonControl::from_density(PiecewiseConstantControl::new(vec![0.0, 0.5, 1.0], vec![1.0, -1.0]).unwrap())
            .unwrap();
        assert!(bang_bang_approximate(&u, 1.0, 1.0, 4).is_err());
        assert!(bang_bang_approximate(&u, 0.0, 2.0, 4).is_err());
        assert!(bang_bang_approximate(&u, 2.0, 3.0, 4).is_err());
        let pos = RadonControl::from_density(PiecewiseConstantControl::constant(1.5, 0.0, 1.0).unwrap()).unwrap();
        let p = bang_bang_approximate(&pos, 1.0, 2.0, 4).unwrap();
        assert!((p.l1_norm() - 1.5).abs() < 1e-12);
        assert!(p.values().iter().all(|&v| v == 1.0 || v == 2.0));
    }

    #[test]
    fn trace_and_csv() {
        let u = unit_atom();
        let tr = u.trace(&[0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(tr.values, vec![0.0, 0.0, 1.0, 1.0]);
        assert_eq!(tr.bv_seminorm(), 1.0);
        assert_eq!(tr.to_csv(), "time,value\n0.0,0.0\n0.25,0.0\n0.5,1.0\n1.0,1.0\n");
    }

    #[test]
    fn repeated_concatenates_periods() {
        let p = PiecewiseConstantControl::uniform(0.0, 0.3, vec![1.0, -1.0, 2.0]).unwrap();
        let r = p.repeated(5).unwrap();
        assert_eq!(r.values().len(), 15);
        assert!((r.end() - 1.5).abs() < 1e-15);
        assert!((r.l1_norm() - 5.0 * p.l1_norm()).abs() < 1e-12);
    }
}
