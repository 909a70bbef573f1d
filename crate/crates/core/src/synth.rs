//! Seeded synthetic corpora with heavy-tailed citation counts.
//!
//! Every draw comes from one [`ChaCha8Rng`] stream seeded from
//! [`SynthConfig::seed`] and consumed in a fixed order, so a seed and
//! configuration always produce the same corpus.
//!
//! Cited counts follow a shifted discrete power law: with `u` uniform on
//! (0, 1], `k = 1 + floor(scale * (u^(-1/(alpha-1)) - 1))`, whose tail mass
//! decays like `k^-(alpha-1)`. Draws above [`CITATION_CUTOFF`] are redrawn.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Corpus, Publication, Researcher, YearWindow};

/// Name of the generator algorithm, recorded in run metadata.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64)";

/// Largest citation count the sampler will emit.
pub const CITATION_CUTOFF: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_sds: usize,
    /// UDAs the SDSs are spread over (round-robin).
    pub n_uda: usize,
    /// Inclusive range of researchers per SDS.
    pub researchers_per_sds: [usize; 2],
    /// Mean number of publications led by an active researcher.
    pub pubs_per_researcher: f64,
    /// Typical share of researchers with no publication of their own.
    pub inactive_fraction: f64,
    /// Probability that an SDS is sparsely publishing (most members inactive).
    pub low_coverage_sds_prob: f64,
    /// Mean share of uncited publications.
    pub uncited_fraction: f64,
    /// Relative spread of the uncited share across subject categories.
    pub uncited_spread: f64,
    /// Relative increase of the uncited share from the oldest to the most
    /// recent year (recent papers have had less time to be cited).
    pub uncited_recent_boost: f64,
    /// Range of the per-category power-law exponent.
    pub tail_exponent: [f64; 2],
    /// Range of the per-category citation scale.
    pub citation_scale: [f64; 2],
    /// Log-scale spread of researcher quality.
    pub quality_sigma: f64,
    pub n_categories: usize,
    pub categories_per_sds: usize,
    pub multi_category_prob: f64,
    pub max_coauthors: usize,
    pub cross_sds_prob: f64,
    pub years: [i32; 2],
    pub census_date: Option<String>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            n_sds: 20,
            n_uda: 5,
            researchers_per_sds: [100, 140],
            pubs_per_researcher: 6.0,
            inactive_fraction: 0.1,
            low_coverage_sds_prob: 0.05,
            uncited_fraction: 0.3,
            uncited_spread: 0.8,
            uncited_recent_boost: 1.0,
            tail_exponent: [2.5, 3.5],
            citation_scale: [2.0, 20.0],
            quality_sigma: 0.6,
            n_categories: 12,
            categories_per_sds: 3,
            multi_category_prob: 0.15,
            max_coauthors: 3,
            cross_sds_prob: 0.1,
            years: [2004, 2008],
            census_date: None,
        }
    }
}

fn check(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidConfig(what.into()))
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        check(self.n_sds >= 1, "n_sds must be at least 1")?;
        check(self.n_uda >= 1, "n_uda must be at least 1")?;
        let [rmin, rmax] = self.researchers_per_sds;
        check(
            rmin >= 1 && rmin <= rmax,
            "researchers_per_sds must be a range [min, max] with min >= 1",
        )?;
        check(
            self.pubs_per_researcher.is_finite() && self.pubs_per_researcher >= 1.0,
            "pubs_per_researcher must be at least 1",
        )?;
        check(prob(self.inactive_fraction), "inactive_fraction must lie in [0, 1]")?;
        check(
            prob(self.low_coverage_sds_prob),
            "low_coverage_sds_prob must lie in [0, 1]",
        )?;
        check(
            (0.0..1.0).contains(&self.uncited_fraction),
            "uncited_fraction must lie in [0, 1)",
        )?;
        check(prob(self.uncited_spread), "uncited_spread must lie in [0, 1]")?;
        check(
            self.uncited_recent_boost >= 0.0 && self.uncited_recent_boost.is_finite(),
            "uncited_recent_boost must be non-negative",
        )?;
        let [emin, emax] = self.tail_exponent;
        check(emin > 1.0 && emin <= emax, "tail_exponent must be a range above 1")?;
        let [smin, smax] = self.citation_scale;
        check(smin > 0.0 && smin <= smax, "citation_scale must be a positive range")?;
        check(self.quality_sigma >= 0.0, "quality_sigma must be non-negative")?;
        check(self.n_categories >= 1, "n_categories must be at least 1")?;
        check(
            (1..=self.n_categories).contains(&self.categories_per_sds),
            "categories_per_sds must lie in [1, n_categories]",
        )?;
        check(prob(self.multi_category_prob), "multi_category_prob must lie in [0, 1]")?;
        check(prob(self.cross_sds_prob), "cross_sds_prob must lie in [0, 1]")?;
        check(self.years[0] <= self.years[1], "years must be a range [start, end]")?;
        Ok(())
    }
}

/// One subject category's citation regime.
#[derive(Debug, Clone, Copy)]
struct CategoryRegime {
    exponent: f64,
    scale: f64,
    uncited: f64,
}

/// Draws a cited count (>= 1) from the shifted discrete power law.
pub fn sample_cited<R: Rng + ?Sized>(rng: &mut R, exponent: f64, scale: f64) -> u64 {
    loop {
        // 1 - [0, 1) is (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let x = scale * (u.powf(-1.0 / (exponent - 1.0)) - 1.0);
        if x < CITATION_CUTOFF as f64 {
            return 1 + x.floor() as u64;
        }
    }
}

struct Member {
    index: usize,
    sds: usize,
    quality: f64,
    lead_pubs: u64,
}

/// Generates a corpus. Invalid configurations are rejected.
pub fn generate(config: &SynthConfig) -> Result<Corpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let window = YearWindow::new(config.years[0], config.years[1])?;
    let n_years = (window.end - window.start + 1) as f64;

    let regimes: Vec<CategoryRegime> = (0..config.n_categories)
        .map(|_| {
            let spread = config.uncited_spread * (2.0 * rng.random::<f64>() - 1.0);
            CategoryRegime {
                exponent: uniform(&mut rng, config.tail_exponent),
                scale: uniform(&mut rng, config.citation_scale),
                uncited: (config.uncited_fraction * (1.0 + spread)).clamp(0.0, 0.95),
            }
        })
        .collect();
    let category_code = |c: usize| format!("C{c:03}");

    let quality = LogNormal::new(0.0, config.quality_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    // 1 + failures before a success with p = 1/mean has the requested mean
    let productivity =
        Geometric::new(1.0 / config.pubs_per_researcher).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut researchers = Vec::new();
    let mut members: Vec<Vec<Member>> = Vec::with_capacity(config.n_sds);
    let mut home: Vec<Vec<usize>> = Vec::with_capacity(config.n_sds);
    for s in 0..config.n_sds {
        let sds = format!("S{s:03}");
        let uda = format!("U{:02}", s % config.n_uda);
        home.push(index::sample(&mut rng, config.n_categories, config.categories_per_sds).into_vec());
        let inactive = if rng.random_bool(config.low_coverage_sds_prob) {
            0.7
        } else {
            config.inactive_fraction
        };
        let n = rng.random_range(config.researchers_per_sds[0]..=config.researchers_per_sds[1]);
        let mut list = Vec::with_capacity(n);
        for _ in 0..n {
            let index = researchers.len();
            researchers.push(Researcher {
                researcher_id: format!("R{index:06}"),
                sds: sds.clone(),
                uda: uda.clone(),
            });
            let active = !rng.random_bool(inactive);
            let q = quality.sample(&mut rng);
            let lead_pubs = if active { 1 + productivity.sample(&mut rng) } else { 0 };
            list.push(Member {
                index,
                sds: s,
                quality: q,
                lead_pubs,
            });
        }
        members.push(list);
    }

    let mut publications = Vec::new();
    for s in 0..config.n_sds {
        let active: Vec<usize> = (0..members[s].len()).filter(|&i| members[s][i].lead_pubs > 0).collect();
        for m in &members[s] {
            for _ in 0..m.lead_pubs {
                let year = rng.random_range(window.start..=window.end);
                let homes = &home[m.sds];
                let primary = homes[rng.random_range(0..homes.len())];
                let mut cats = vec![primary];
                if rng.random_bool(config.multi_category_prob) {
                    let second = if homes.len() > 1 {
                        homes[rng.random_range(0..homes.len())]
                    } else {
                        rng.random_range(0..config.n_categories)
                    };
                    if second != primary {
                        cats.push(second);
                    }
                }
                let recency = if n_years > 1.0 {
                    (year - window.start) as f64 / (n_years - 1.0)
                } else {
                    0.0
                };
                let uncited = cats.iter().map(|&c| regimes[c].uncited).sum::<f64>() / cats.len() as f64
                    * (1.0 + config.uncited_recent_boost * recency);
                let uncited = uncited.min(0.95);
                let citations = if rng.random_bool(uncited) {
                    0
                } else {
                    let r = regimes[primary];
                    // older papers have had longer to accumulate citations
                    let age = 0.5 + (window.end - year) as f64 / n_years;
                    sample_cited(&mut rng, r.exponent, r.scale * m.quality * age)
                };

                let mut authors = vec![m.index];
                let k = rng
                    .random_range(0..=config.max_coauthors)
                    .min(active.len().saturating_sub(1));
                for pick in index::sample(&mut rng, active.len(), k.min(active.len())) {
                    let idx = members[s][active[pick]].index;
                    if !authors.contains(&idx) {
                        authors.push(idx);
                    }
                }
                if config.n_sds > 1 && rng.random_bool(config.cross_sds_prob) {
                    let other = (s + rng.random_range(1..config.n_sds)) % config.n_sds;
                    let pool = &members[other];
                    let idx = pool[rng.random_range(0..pool.len())].index;
                    if !authors.contains(&idx) {
                        authors.push(idx);
                    }
                }

                publications.push(Publication {
                    pub_id: format!("P{:07}", publications.len()),
                    year,
                    citations,
                    categories: cats.into_iter().map(category_code).collect(),
                    author_ids: authors.iter().map(|&i| researchers[i].researcher_id.clone()).collect(),
                });
            }
        }
    }

    Corpus::new(publications, researchers, window, config.census_date.clone())
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}
