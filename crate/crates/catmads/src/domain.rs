//! Mixed-variable decision space: variables, domains, points and evaluations.
//!
//! A domain is an ordered list of categorical, integer and continuous
//! variables. Points store categorical values as 0-based indices; optional
//! category labels exist only for I/O. The categorical component of a point
//! is the vector of its categorical indices, the quantitative component is
//! the concatenation of its integer and continuous values.

use std::collections::HashSet;
use std::fmt;


use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One decision variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VariableSpec {
    /// Finite unordered set of `levels` categories.
    Categorical {
        levels: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    /// Bounded integer variable.
    Integer { lb: i64, ub: i64 },
    /// Bounded continuous variable.
    Continuous { lb: f64, ub: f64 },
}

impl VariableSpec {
    fn check(&self, index: usize) -> Result<()> {
        match self {
            VariableSpec::Categorical { levels, labels } => {
                if *levels < 2 {
                    return Err(Error::Domain(format!(
                        "variable {index}: categorical variables need at least 2 categories"
                    )));
                }
                if let Some(labels) = labels {
                    if labels.len() != *levels {
                        return Err(Error::Domain(format!(
                            "variable {index}: {} labels for {levels} categories",
                            labels.len()
                        )));
                    }
                    let distinct: HashSet<&str> = labels.iter().map(|s| s.as_str()).collect();
                    if distinct.len() != labels.len() {
                        return Err(Error::Domain(format!(
                            "variable {index}: duplicate category labels"
                        )));
                    }
                }
            }
            VariableSpec::Integer { lb, ub } => {
                if lb > ub {
                    return Err(Error::Domain(format!(
                        "variable {index}: integer bounds {lb} > {ub}"
                    )));
                }
            }
            VariableSpec::Continuous { lb, ub } => {
                if !(lb.is_finite() && ub.is_finite()) {
                    return Err(Error::Domain(format!(
                        "variable {index}: continuous bounds must be finite"
                    )));
                }
                if lb > ub {
                    return Err(Error::Domain(format!(
                        "variable {index}: continuous bounds {lb} > {ub}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
struct DomainDecl {
    variables: Vec<VariableSpec>,
}

/// An ordered mixed-variable domain.
///
/// Derived per-type views (`cat_levels`, `int_bounds`, `con_bounds`) follow
/// the declaration order of the variables of that type.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    variables: Vec<VariableSpec>,
    cat_levels: Vec<usize>,
    int_bounds: Vec<(i64, i64)>,
    con_bounds: Vec<(f64, f64)>,
}

impl Domain {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::Domain("a domain needs at least one variable".into()));
        }
        let mut cat_levels = Vec::new();
        let mut int_bounds = Vec::new();
        let mut con_bounds = Vec::new();
        for (i, v) in variables.iter().enumerate() {
            v.check(i)?;
            match v {
                VariableSpec::Categorical { levels, .. } => cat_levels.push(*levels),
                VariableSpec::Integer { lb, ub } => int_bounds.push((*lb, *ub)),
                VariableSpec::Continuous { lb, ub } => con_bounds.push((*lb, *ub)),
            }
        }
        Ok(Domain { variables, cat_levels, int_bounds, con_bounds })
    }

    /// Parses a domain definition from TOML text with a `[[variables]]` array.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let decl: DomainDecl =
            toml::from_str(text).map_err(|e| Error::Parse(format!("domain file: {e}")))?;
        Domain::new(decl.variables)
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn n_cat(&self) -> usize {
        self.cat_levels.len()
    }

    pub fn n_int(&self) -> usize {
        self.int_bounds.len()
    }

    pub fn n_con(&self) -> usize {
        self.con_bounds.len()
    }

    pub fn n_qnt(&self) -> usize {
        self.n_int() + self.n_con()
    }

    pub fn n(&self) -> usize {
        self.variables.len()
    }

    /// Category counts per categorical variable, in declaration order.
    pub fn cat_levels(&self) -> &[usize] {
        &self.cat_levels
    }

    pub fn int_bounds(&self) -> &[(i64, i64)] {
        &self.int_bounds
    }

    pub fn con_bounds(&self) -> &[(f64, f64)] {
        &self.con_bounds
    }

    /// Bounds of the quantitative component (integers first, as reals).
    pub fn qnt_bounds(&self) -> Vec<(f64, f64)> {
        self.int_bounds
            .iter()
            .map(|&(lb, ub)| (lb as f64, ub as f64))
            .chain(self.con_bounds.iter().copied())
            .collect()
    }

    /// Number of categorical components `|X^cat|` (1 if there are none).
    pub fn cat_component_count(&self) -> u128 {
        self.cat_levels
            .iter()
            .fold(1u128, |acc, &l| acc.saturating_mul(l as u128))
    }

    /// True iff every index and bound invariant of `point` holds here.
    pub fn validate(&self, point: &Point) -> bool {
        if point.cat.len() != self.n_cat()
            || point.int.len() != self.n_int()
            || point.con.len() != self.n_con()
        {
            return false;
        }
        for (i, &c) in point.cat.iter().enumerate() {
            if c >= self.cat_levels[i] {
                return false;
            }
        }
        for (i, &x) in point.int.iter().enumerate() {
            let (lb, ub) = self.int_bounds[i];
            if x < lb || x > ub {
                return false;
            }
        }
        for (i, &x) in point.con.iter().enumerate() {
            let (lb, ub) = self.con_bounds[i];
            if !x.is_finite() || x < lb || x > ub {
                return false;
            }
        }
        true
    }

    /// Enumerates categorical components.
    ///
    /// With `|X^cat| <= cap` this is the full set in lexicographic index
    /// order. Above the cap it returns the incumbent, its Hamming-distance-1
    /// components, then uniformly sampled distinct components until `cap`
    /// components are collected (truncated to `cap` if the incumbent plus its
    /// Hamming-1 set already exceed it).
    pub fn enumerate_components<R: Rng>(
        &self,
        cap: usize,
        incumbent: &[usize],
        rng: &mut R,
    ) -> Result<Vec<Vec<usize>>> {
        if self.n_cat() == 0 {
            return Err(Error::Domain(
                "cannot enumerate categorical components without categorical variables".into(),
            ));
        }
        if cap == 0 {
            return Err(Error::Config("enumeration cap must be at least 1".into()));
        }
        let total = self.cat_component_count();
        if total <= cap as u128 {
            let mut out = Vec::with_capacity(total as usize);
            let mut current = vec![0usize; self.n_cat()];
            loop {
                out.push(current.clone());
                // odometer: last variable runs fastest
                let mut i = self.n_cat();
                loop {
                    if i == 0 {
                        return Ok(out);
                    }
                    i -= 1;
                    current[i] += 1;
                    if current[i] < self.cat_levels[i] {
                        break;
                    }
                    current[i] = 0;
                }
            }
        }

        if incumbent.len() != self.n_cat()
            || incumbent.iter().zip(&self.cat_levels).any(|(&c, &l)| c >= l)
        {
            return Err(Error::Point("incumbent component out of range".into()));
        }
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut out = Vec::new();
        let mut push = |comp: Vec<usize>, out: &mut Vec<Vec<usize>>| {
            if seen.insert(comp.clone()) {
                out.push(comp);
            }
        };
        push(incumbent.to_vec(), &mut out);
        for i in 0..self.n_cat() {
            for c in 0..self.cat_levels[i] {
                if c != incumbent[i] {
                    let mut comp = incumbent.to_vec();
                    comp[i] = c;
                    push(comp, &mut out);
                }
            }
        }
        out.truncate(cap);
        while out.len() < cap {
            let comp: Vec<usize> = self
                .cat_levels
                .iter()
                .map(|&l| rng.gen_range(0..l))
                .collect();
            push(comp, &mut out);
        }
        Ok(out)
    }

    /// Label of category `index` of categorical variable `var` (categorical
    /// numbering), falling back to the index itself.
    pub fn category_label(&self, var: usize, index: usize) -> String {
        let mut k = 0;
        for v in &self.variables {
            if let VariableSpec::Categorical { labels, .. } = v {
                if k == var {
                    if let Some(labels) = labels {
                        return labels[index].clone();
                    }
                    return index.to_string();
                }
                k += 1;
            }
        }
        index.to_string()
    }
}

/// A point of the domain: categorical indices, integers, reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub cat: Vec<usize>,
    pub int: Vec<i64>,
    pub con: Vec<f64>,
}

impl Point {
    pub fn new(cat: Vec<usize>, int: Vec<i64>, con: Vec<f64>) -> Self {
        Point { cat, int, con }
    }

    /// Quantitative component: integers (as reals) followed by reals.
    pub fn qnt(&self) -> Vec<f64> {
        self.int
            .iter()
            .map(|&x| x as f64)
            .chain(self.con.iter().copied())
            .collect()
    }

    /// Same quantitative component, different categorical component.
    pub fn with_cat(&self, cat: Vec<usize>) -> Point {
        Point { cat, int: self.int.clone(), con: self.con.clone() }
    }

    /// Canonical one-line text encoding: categorical indices, then integers,
    /// then reals with 17 significant digits, space separated.
    pub fn encode(&self) -> String {
        let mut fields: Vec<String> = Vec::with_capacity(self.cat.len() + self.int.len() + self.con.len());
        fields.extend(self.cat.iter().map(|c| c.to_string()));
        fields.extend(self.int.iter().map(|x| x.to_string()));
        fields.extend(self.con.iter().map(|x| format_real(*x)));
        fields.join(" ")
    }

    /// Parses the canonical encoding against `domain`'s variable counts.
    pub fn decode(domain: &Domain, line: &str) -> Result<Point> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let expect = domain.n_cat() + domain.n_int() + domain.n_con();
        if fields.len() != expect {
            return Err(Error::Parse(format!(
                "point line has {} fields, domain expects {expect}",
                fields.len()
            )));
        }
        let mut it = fields.into_iter();
        let cat = (0..domain.n_cat())
            .map(|_| {
                it.next().unwrap().parse::<usize>().map_err(|e| {
                    Error::Parse(format!("bad categorical index: {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let int = (0..domain.n_int())
            .map(|_| {
                it.next().unwrap().parse::<i64>().map_err(|e| {
                    Error::Parse(format!("bad integer value: {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let con = (0..domain.n_con())
            .map(|_| {
                it.next().unwrap().parse::<f64>().map_err(|e| {
                    Error::Parse(format!("bad real value: {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Point { cat, int, con })
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode())
    }
}

/// 17 significant digits: enough to round-trip any f64 exactly.
pub(crate) fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Evaluation status: a hidden constraint or crash invalidates the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalStatus {
    Ok,
    HiddenFailure,
}

/// Extended-real objective and constraint values of one blackbox call.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub g: Vec<f64>,
    /// Aggregate constraint violation, `sum_j max(0, g_j)^2`.
    pub h: f64,
    pub status: EvalStatus,
}

impl Evaluation {
    pub fn new(f: f64, g: Vec<f64>) -> Self {
        let h = aggregate_violation(&g);
        Evaluation { f, g, h, status: EvalStatus::Ok }
    }

    /// Hidden constraint hit: the point is assigned `f = +inf`.
    pub fn hidden_failure(n_constraints: usize) -> Self {
        Evaluation {
            f: f64::INFINITY,
            g: vec![f64::INFINITY; n_constraints],
            h: f64::INFINITY,
            status: EvalStatus::HiddenFailure,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status == EvalStatus::Ok && self.h == 0.0
    }
}

/// Progressive-barrier violation aggregate `h = sum_j max(0, g_j)^2`.
///
/// Any non-finite constraint value makes the whole aggregate `+inf`.
pub fn aggregate_violation(g: &[f64]) -> f64 {
    let mut h = 0.0;
    for &gj in g {
        if gj.is_nan() || gj == f64::INFINITY {
            return f64::INFINITY;
        }
        let v = gj.max(0.0);
        h += v * v;
    }
    h
}
