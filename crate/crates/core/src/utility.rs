//! Concrete monotone submodular utilities and their instance file format.
//!
//! Instance files are JSON documents tagged by `kind`:
//!
//! ```text
//! {"kind": "coverage2d",
//!  "sources": [[x, y], ...],          // information sources
//!  "sites": [[x, y], ...],            // placement locations
//!  "site_of_strategy": [s0, s1, ...], // site index per strategy
//!  "depot": [x, y]}                   // optional virtual element
//!
//! {"kind": "weighted_coverage",
//!  "weights": [w0, w1, ...],          // weight per universe element
//!  "covers": [[e, ...], ...]}         // covered elements per strategy
//! ```

use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::SetFunction;
use crate::set::StrategySet;

/// Site counts up to this size get a memo table indexed by site mask.
const SITE_MEMO_LIMIT: usize = 20;

pub type Point = [f64; 2];

/// `f(R) = Σ w_e` over the union of the elements covered by `R`.
#[derive(Debug, Clone)]
pub struct WeightedCoverage {
    weights: Vec<f64>,
    covers: Vec<Vec<usize>>,
    masks: Vec<Vec<u64>>,
}

impl WeightedCoverage {
    pub fn new(weights: Vec<f64>, covers: Vec<Vec<usize>>) -> Result<Self> {
        if covers.is_empty() {
            return Err(Error::Config(
                "weighted coverage needs at least one strategy".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Config(format!(
                "element weight {w} is not a nonnegative number"
            )));
        }
        let words = weights.len().div_ceil(64).max(1);
        let mut masks = Vec::with_capacity(covers.len());
        for (p, cover) in covers.iter().enumerate() {
            let mut m = vec![0u64; words];
            for &e in cover {
                if e >= weights.len() {
                    return Err(Error::Config(format!(
                        "strategy {p} covers element {e}, universe has {}",
                        weights.len()
                    )));
                }
                m[e / 64] |= 1 << (e % 64);
            }
            masks.push(m);
        }
        Ok(WeightedCoverage {
            weights,
            covers,
            masks,
        })
    }

    /// Additive utility: strategy `p` alone covers element `p` with weight `w[p]`.
    pub fn modular(weights: Vec<f64>) -> Result<Self> {
        let covers = (0..weights.len()).map(|p| vec![p]).collect();
        Self::new(weights, covers)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn covers(&self) -> &[Vec<usize>] {
        &self.covers
    }
}

impl SetFunction for WeightedCoverage {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn eval(&self, set: &StrategySet) -> f64 {
        let words = self.masks[0].len();
        let mut small = [0u64; 4];
        let mut big;
        let union: &mut [u64] = if words <= small.len() {
            &mut small[..words]
        } else {
            big = vec![0u64; words];
            &mut big
        };
        for p in set.iter() {
            for (u, m) in union.iter_mut().zip(&self.masks[p]) {
                *u |= m;
            }
        }
        let mut total = 0.0;
        for (wi, &word) in union.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                total += self.weights[wi * 64 + b];
            }
        }
        total
    }
}

/// Sensor-placement utility: every source relays to its nearest chosen site,
/// with a fixed virtual depot always available.
///
/// `f(R) = L({depot}) − L(R ∪ {depot})` where `L` sums, over sources, the
/// Euclidean distance to the nearest chosen site.
pub struct CoverageUtility {
    sources: Vec<Point>,
    sites: Vec<Point>,
    site_of_strategy: Vec<usize>,
    depot: Point,
    // dist[site][source]
    dist: Vec<Vec<f64>>,
    depot_dist: Vec<f64>,
    memo: Vec<OnceLock<f64>>,
}

impl CoverageUtility {
    pub fn new(
        sources: Vec<Point>,
        sites: Vec<Point>,
        site_of_strategy: Vec<usize>,
        depot: Option<Point>,
    ) -> Result<Self> {
        if site_of_strategy.is_empty() {
            return Err(Error::Config(
                "coverage utility needs at least one strategy".into(),
            ));
        }
        let finite = |p: &Point| p[0].is_finite() && p[1].is_finite();
        if !sources.iter().chain(&sites).all(finite) {
            return Err(Error::Config("coordinates must be finite".into()));
        }
        if let Some(&s) = site_of_strategy.iter().find(|&&s| s >= sites.len()) {
            return Err(Error::Config(format!(
                "strategy maps to site {s}, only {} sites",
                sites.len()
            )));
        }
        let depot = match depot {
            Some(d) if finite(&d) => d,
            Some(_) => return Err(Error::Config("depot must be finite".into())),
            None => bounding_box_centroid(sources.iter().chain(&sites)),
        };
        let euclid = |a: &Point, b: &Point| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let dist = sites
            .iter()
            .map(|b| sources.iter().map(|d| euclid(d, b)).collect())
            .collect();
        let depot_dist = sources.iter().map(|d| euclid(d, &depot)).collect();
        let memo = if sites.len() <= SITE_MEMO_LIMIT {
            (0..1usize << sites.len())
                .map(|_| OnceLock::new())
                .collect()
        } else {
            Vec::new()
        };
        Ok(CoverageUtility {
            sources,
            sites,
            site_of_strategy,
            depot,
            dist,
            depot_dist,
            memo,
        })
    }

    pub fn sources(&self) -> &[Point] {
        &self.sources
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn site_of_strategy(&self) -> &[usize] {
        &self.site_of_strategy
    }

    pub fn depot(&self) -> Point {
        self.depot
    }

    /// Number of distinct sites occupied by the strategies in `set`.
    pub fn distinct_sites(&self, set: &StrategySet) -> usize {
        let mut seen = vec![false; self.sites.len()];
        set.iter()
            .for_each(|p| seen[self.site_of_strategy[p]] = true);
        seen.iter().filter(|&&s| s).count()
    }

    fn value_of_sites(&self, sites: &[usize]) -> f64 {
        let mut total = 0.0;
        for (d, &base) in self.depot_dist.iter().enumerate() {
            let mut best = base;
            for &s in sites {
                best = best.min(self.dist[s][d]);
            }
            total += base - best;
        }
        total
    }
}

fn bounding_box_centroid<'a>(points: impl Iterator<Item = &'a Point>) -> Point {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if lo[0].is_finite() {
        [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0]
    } else {
        [0.0, 0.0]
    }
}

impl SetFunction for CoverageUtility {
    fn ground_size(&self) -> usize {
        self.site_of_strategy.len()
    }

    fn eval(&self, set: &StrategySet) -> f64 {
        if self.memo.is_empty() {
            let mut sites: Vec<usize> = set.iter().map(|p| self.site_of_strategy[p]).collect();
            sites.sort_unstable();
            sites.dedup();
            return self.value_of_sites(&sites);
        }
        let mask = set
            .iter()
            .fold(0usize, |m, p| m | 1 << self.site_of_strategy[p]);
        *self.memo[mask].get_or_init(|| {
            let sites: Vec<usize> = (0..self.sites.len())
                .filter(|s| mask >> s & 1 == 1)
                .collect();
            self.value_of_sites(&sites)
        })
    }
}

/// Serialized form of a utility instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityInstance {
    #[serde(rename = "coverage2d")]
    Coverage2d {
        sources: Vec<Point>,
        sites: Vec<Point>,
        site_of_strategy: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        depot: Option<Point>,
    },
    WeightedCoverage {
        weights: Vec<f64>,
        covers: Vec<Vec<usize>>,
    },
}

impl UtilityInstance {
    pub fn build(&self) -> Result<Utility> {
        Ok(match self.clone() {
            UtilityInstance::Coverage2d {
                sources,
                sites,
                site_of_strategy,
                depot,
            } => Utility::Coverage(CoverageUtility::new(
                sources,
                sites,
                site_of_strategy,
                depot,
            )?),
            UtilityInstance::WeightedCoverage { weights, covers } => {
                Utility::Weighted(WeightedCoverage::new(weights, covers)?)
            }
        })
    }

    pub fn ground_size(&self) -> usize {
        match self {
            UtilityInstance::Coverage2d {
                site_of_strategy, ..
            } => site_of_strategy.len(),
            UtilityInstance::WeightedCoverage { covers, .. } => covers.len(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Any of the built-in utility families.
pub enum Utility {
    Coverage(CoverageUtility),
    Weighted(WeightedCoverage),
}

impl Utility {
    pub fn instance(&self) -> UtilityInstance {
        match self {
            Utility::Coverage(c) => UtilityInstance::Coverage2d {
                sources: c.sources.clone(),
                sites: c.sites.clone(),
                site_of_strategy: c.site_of_strategy.clone(),
                depot: Some(c.depot),
            },
            Utility::Weighted(w) => UtilityInstance::WeightedCoverage {
                weights: w.weights.clone(),
                covers: w.covers.clone(),
            },
        }
    }

    pub fn distinct_sites(&self, set: &StrategySet) -> Option<usize> {
        match self {
            Utility::Coverage(c) => Some(c.distinct_sites(set)),
            Utility::Weighted(_) => None,
        }
    }
}

impl SetFunction for Utility {
    fn ground_size(&self) -> usize {
        match self {
            Utility::Coverage(c) => c.ground_size(),
            Utility::Weighted(w) => w.ground_size(),
        }
    }

    fn eval(&self, set: &StrategySet) -> f64 {
        match self {
            Utility::Coverage(c) => c.eval(set),
            Utility::Weighted(w) => w.eval(set),
        }
    }
}
