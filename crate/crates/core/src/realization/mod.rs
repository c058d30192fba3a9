//! State-space realizations `x+ = Ax + Bu, y = Cx + Du` of compiled
//! algorithms, their transfer matrices, and realization-level algebra.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::dsl::{lower, AlgorithmDef, Atom, ChannelKind, Lowered, Mode};
use crate::error::{Error, Result};
use crate::symbolic::{transfer_matrix, MatParam, MatRatZ, Matrix, ParamRat};

/// One oracle channel of a realization.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Port {
    pub label: String,
    pub kind: ChannelKind,
}

impl Port {
    /// The port after its oracle is replaced by the inverse map.
    pub fn conjugated(&self) -> Port {
        let kind = match &self.kind {
            ChannelKind::Subgradient(f) => ChannelKind::Subgradient(f.flipped()),
            ChannelKind::Opaque(k) => match k.strip_suffix("^-1") {
                Some(base) => ChannelKind::Opaque(base.to_string()),
                None => ChannelKind::Opaque(format!("{k}^-1")),
            },
        };
        Port {
            label: self.label.clone(),
            kind,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct StateSpace {
    pub name: String,
    pub a: MatParam,
    pub b: MatParam,
    pub c: MatParam,
    pub d: MatParam,
    pub ports: Vec<Port>,
    pub var_names: Vec<String>,
    pub params: Vec<String>,
}

impl StateSpace {
    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn oracles(&self) -> usize {
        self.ports.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.ports.iter().map(|p| p.label.clone()).collect()
    }

    /// Checks block shapes.
    pub fn check(&self) -> Result<()> {
        let (n, m) = (self.a.rows(), self.ports.len());
        let ok = self.a.cols() == n
            && self.b.shape() == (n, m)
            && self.c.shape() == (m, n)
            && self.d.shape() == (m, m)
            && self.var_names.len() == n;
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "inconsistent realization: A {:?}, B {:?}, C {:?}, D {:?}, {} states named, {m} oracles",
                self.a.shape(),
                self.b.shape(),
                self.c.shape(),
                self.d.shape(),
                self.var_names.len()
            )))
        }
    }

    /// Reorders the oracle channels: new channel `i` is old channel
    /// `perm[i]`.
    pub fn permute_ports(&self, perm: &[usize]) -> StateSpace {
        let all: Vec<usize> = (0..self.states()).collect();
        StateSpace {
            b: self.b.select(&all, perm),
            c: self.c.select(perm, &all),
            d: self.d.select(perm, perm),
            ports: perm.iter().map(|&i| self.ports[i].clone()).collect(),
            ..self.clone()
        }
    }
}

/// Builds the realization from the lowered form.
pub fn from_lowered(l: &Lowered) -> StateSpace {
    let (n, m) = (l.vars.len(), l.channels.len());
    let st = |j: usize| Atom::State(l.vars[j].clone());
    let a = Matrix::from_fn(n, n, |i, j| l.next[i].coeff(&st(j)));
    let b = Matrix::from_fn(n, m, |i, k| l.next[i].coeff(&Atom::Out(k)));
    let c = Matrix::from_fn(m, n, |k, j| l.channels[k].input.coeff(&st(j)));
    let d = Matrix::from_fn(m, m, |k, q| l.channels[k].input.coeff(&Atom::Out(q)));
    StateSpace {
        name: l.name.clone(),
        a,
        b,
        c,
        d,
        ports: l
            .channels
            .iter()
            .map(|ch| Port {
                label: ch.label.clone(),
                kind: ch.kind.clone(),
            })
            .collect(),
        var_names: l.vars.clone(),
        params: l.params.clone(),
    }
}

/// Compiles an algorithm by symbolic execution of one iteration. Channels
/// are ordered by call order.
pub fn build_state_space(def: &AlgorithmDef, mode: Mode) -> Result<StateSpace> {
    Ok(from_lowered(&lower(def, mode)?))
}

/// `C (zI - A)^{-1} B + D`.
pub fn transfer_function(ss: &StateSpace) -> Result<MatRatZ> {
    transfer_matrix(&ss.a, &ss.b, &ss.c, &ss.d)
}

/// The realization `(Q A Q^{-1}, Q B, C Q^{-1}, D)` in the new coordinates
/// `Q x`.
pub fn apply_state_transform(ss: &StateSpace, q: &MatParam) -> Result<StateSpace> {
    if q.shape() != (ss.states(), ss.states()) {
        return Err(Error::Dimension(format!("state transform must be {n}x{n}", n = ss.states())));
    }
    let qi = q.inverse()?;
    Ok(StateSpace {
        a: q.mul(&ss.a)?.mul(&qi)?,
        b: q.mul(&ss.b)?,
        c: ss.c.mul(&qi)?,
        var_names: (0..ss.states()).map(|i| format!("q{}", i + 1)).collect(),
        ..ss.clone()
    })
}

/// Realization of the map with inputs `(y_S, u_R)` and outputs
/// `(u_S, y_R)`, where `S = subset` and `R` is its complement; channels
/// keep their positions.
pub fn partial_inverse(ss: &StateSpace, subset: &[usize]) -> Result<StateSpace> {
    let m = ss.oracles();
    if let Some(&bad) = subset.iter().find(|&&i| i >= m) {
        return Err(Error::Dimension(format!("oracle index {bad} out of range")));
    }
    let s: Vec<usize> = (0..m).filter(|i| subset.contains(i)).collect();
    let r: Vec<usize> = (0..m).filter(|i| !subset.contains(i)).collect();
    if s.is_empty() {
        return Ok(ss.clone());
    }
    let n = ss.states();
    let all: Vec<usize> = (0..n).collect();
    let e = ss.d.select(&s, &s).inverse()?;
    let (bs, br) = (ss.b.select(&all, &s), ss.b.select(&all, &r));
    let (cs, cr) = (ss.c.select(&s, &all), ss.c.select(&r, &all));
    let (dsr, drs, drr) = (ss.d.select(&s, &r), ss.d.select(&r, &s), ss.d.select(&r, &r));
    let bse = bs.mul(&e)?;
    let ecs = e.mul(&cs)?;
    let edsr = e.mul(&dsr)?;
    let drse = drs.mul(&e)?;

    let a = ss.a.sub(&bs.mul(&ecs)?)?;
    let b_r = br.sub(&bs.mul(&edsr)?)?;
    let c_s = ecs.negate();
    let c_r = cr.sub(&drs.mul(&ecs)?)?;
    let d_ss = e.clone();
    let d_sr = edsr.negate();
    let d_rs = drse.clone();
    let d_rr = drr.sub(&drs.mul(&edsr)?)?;

    let pos = |i: usize| -> (bool, usize) {
        match s.iter().position(|&x| x == i) {
            Some(k) => (true, k),
            None => (false, r.iter().position(|&x| x == i).expect("partition")),
        }
    };
    let b = Matrix::from_fn(n, m, |row, col| match pos(col) {
        (true, k) => bse.get(row, k).clone(),
        (false, k) => b_r.get(row, k).clone(),
    });
    let c = Matrix::from_fn(m, n, |row, col| match pos(row) {
        (true, k) => c_s.get(k, col).clone(),
        (false, k) => c_r.get(k, col).clone(),
    });
    let d = Matrix::from_fn(m, m, |row, col| match (pos(row), pos(col)) {
        ((true, i), (true, j)) => d_ss.get(i, j).clone(),
        ((true, i), (false, j)) => d_sr.get(i, j).clone(),
        ((false, i), (true, j)) => d_rs.get(i, j).clone(),
        ((false, i), (false, j)) => d_rr.get(i, j).clone(),
    });
    let ports = ss
        .ports
        .iter()
        .enumerate()
        .map(|(i, p)| if subset.contains(&i) { p.conjugated() } else { p.clone() })
        .collect();
    Ok(StateSpace {
        a,
        b,
        c,
        d,
        ports,
        ..ss.clone()
    })
}

/// Oracle dependence graph: an edge `j -> i` when the input of oracle `i`
/// depends directly on the output of oracle `j` within an iteration.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Odg {
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    /// Topological order, ties broken by channel index.
    pub order: Vec<usize>,
}

pub fn build_odg(ss: &StateSpace) -> Result<Odg> {
    let m = ss.oracles();
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i != j && !ss.d.get(i, j).is_zero() {
                edges.push((j, i));
            }
        }
    }
    edges.sort_unstable();
    let mut indeg = vec![0usize; m];
    for &(_, i) in &edges {
        indeg[i] += 1;
    }
    let mut order = Vec::with_capacity(m);
    let mut done = vec![false; m];
    while order.len() < m {
        let Some(next) = (0..m).find(|&i| !done[i] && indeg[i] == 0) else {
            let cyc: Vec<&str> = (0..m).filter(|&i| !done[i]).map(|i| ss.ports[i].label.as_str()).collect();
            return Err(Error::NotCausal(format!("dependency cycle among {}", cyc.join(", "))));
        };
        done[next] = true;
        order.push(next);
        for &(j, i) in &edges {
            if j == next {
                indeg[i] -= 1;
            }
        }
    }
    Ok(Odg {
        nodes: ss.labels(),
        edges,
        order,
    })
}

/// Reorders channels into a topological order of the dependence graph, so
/// that `D` becomes lower triangular. Returns the permutation used.
pub fn reorder_causal(ss: &StateSpace) -> Result<(StateSpace, Vec<usize>)> {
    let odg = build_odg(ss)?;
    Ok((ss.permute_ports(&odg.order), odg.order))
}

/// Affine oracle `u = g y + offset` on scalars.
#[derive(Clone, PartialEq, Debug)]
pub struct AffineMap {
    pub gain: ParamRat,
    pub offset: ParamRat,
}

impl AffineMap {
    pub fn new(gain: impl Into<ParamRat>, offset: impl Into<ParamRat>) -> Self {
        AffineMap {
            gain: gain.into(),
            offset: offset.into(),
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct FixedPoint {
    #[serde(serialize_with = "ser_display_vec")]
    pub x: Vec<ParamRat>,
    #[serde(serialize_with = "ser_display_vec")]
    pub y: Vec<ParamRat>,
    #[serde(serialize_with = "ser_display_vec")]
    pub u: Vec<ParamRat>,
}

fn ser_display_vec<S: serde::Serializer, T: fmt::Display>(v: &[T], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Solves `x = Ax + Bu, y = Cx + Du, u = G y + g` exactly.
pub fn fixed_point(ss: &StateSpace, oracles: &[AffineMap]) -> Result<FixedPoint> {
    let (n, m) = (ss.states(), ss.oracles());
    if oracles.len() != m {
        return Err(Error::Dimension(format!("{} oracle maps for {m} oracles", oracles.len())));
    }
    let g = Matrix::from_fn(m, m, |i, j| if i == j { oracles[i].gain.clone() } else { ParamRat::zero() });
    let top = Matrix::blocks(&[vec![&MatParam::identity(n).sub(&ss.a)?, &ss.b.negate()]])?;
    let gc = g.mul(&ss.c)?.negate();
    let gd = MatParam::identity(m).sub(&g.mul(&ss.d)?)?;
    let bottom = Matrix::blocks(&[vec![&gc, &gd]])?;
    let sys = Matrix::blocks(&[vec![&top], vec![&bottom]])?;
    let rhs = Matrix::from_fn(
        n + m,
        1,
        |i, _| if i < n { ParamRat::zero() } else { oracles[i - n].offset.clone() },
    );
    let inv = sys.inverse().map_err(|e| match e {
        Error::Singular => Error::Singular,
        e => e,
    })?;
    let sol = inv.mul(&rhs)?;
    let x: Vec<ParamRat> = (0..n).map(|i| sol.get(i, 0).clone()).collect();
    let u: Vec<ParamRat> = (0..m).map(|i| sol.get(n + i, 0).clone()).collect();
    let xm = Matrix::from_fn(n, 1, |i, _| x[i].clone());
    let um = Matrix::from_fn(m, 1, |i, _| u[i].clone());
    let ym = ss.c.mul(&xm)?.add(&ss.d.mul(&um)?)?;
    let y = (0..m).map(|i| ym.get(i, 0).clone()).collect();
    Ok(FixedPoint { x, y, u })
}

fn cell_strings(m: &MatParam) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect())
        .collect()
}

/// Machine-readable dump of a realization.
#[derive(Serialize)]
pub struct RealizationDump {
    pub name: String,
    pub states: Vec<String>,
    pub oracles: Vec<BTreeMap<&'static str, String>>,
    pub a: Vec<Vec<String>>,
    pub b: Vec<Vec<String>>,
    pub c: Vec<Vec<String>>,
    pub d: Vec<Vec<String>>,
}

impl StateSpace {
    pub fn dump(&self) -> RealizationDump {
        RealizationDump {
            name: self.name.clone(),
            states: self.var_names.clone(),
            oracles: self
                .ports
                .iter()
                .map(|p| BTreeMap::from([("label", p.label.clone()), ("kind", p.kind.to_string())]))
                .collect(),
            a: cell_strings(&self.a),
            b: cell_strings(&self.b),
            c: cell_strings(&self.c),
            d: cell_strings(&self.d),
        }
    }
}

/// Block matrix `[A B; C D]` with row and column labels.
impl fmt::Display for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, m) = (self.states(), self.oracles());
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = vec![String::new()];
        header.extend(self.var_names.iter().cloned());
        header.push("|".into());
        header.extend(self.ports.iter().map(|p| format!("u:{}", p.label)));
        rows.push(header);
        for i in 0..n {
            let mut r = vec![format!("{}+", self.var_names[i])];
            r.extend((0..n).map(|j| self.a.get(i, j).to_string()));
            r.push("|".into());
            r.extend((0..m).map(|j| self.b.get(i, j).to_string()));
            rows.push(r);
        }
        let width = rows[0].len();
        rows.push(vec!["-".repeat(3); width]);
        for i in 0..m {
            let mut r = vec![format!("y:{}", self.ports[i].label)];
            r.extend((0..n).map(|j| self.c.get(i, j).to_string()));
            r.push("|".into());
            r.extend((0..m).map(|j| self.d.get(i, j).to_string()));
            rows.push(r);
        }
        let widths: Vec<usize> = (0..width)
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        writeln!(f, "{}", self.name)?;
        for r in &rows {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            writeln!(f, "  {}", cells.join("  ").trim_end())?;
        }
        Ok(())
    }
}
