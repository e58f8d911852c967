//! The ten acceptance criteria, each a list of check entries.

use crate::checks::{self, guarded, CheckEntry};

pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub run: fn() -> Vec<CheckEntry>,
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub title: &'static str,
    pub entries: Vec<CheckEntry>,
    pub passed: bool,
    pub seconds: f64,
}

impl CriterionResult {
    /// `PASS [n] title` or `FAIL [n] title`, followed by failing entries.
    pub fn line(&self) -> String {
        let mut s = format!("{} [{:2}] {} ({:.1}s)", if self.passed { "PASS" } else { "FAIL" }, self.id, self.title, self.seconds);
        for e in self.entries.iter().filter(|e| !e.passed) {
            s.push_str(&format!("\n       {}: measured {:e} vs {:e}", e.name, e.measured, e.threshold));
            if let Some(n) = &e.note {
                s.push_str(&format!(" ({n})"));
            }
        }
        s
    }
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, title: "operator identities", run: || guarded("operators", checks::operator_identities) },
        Criterion { id: 2, title: "theta-independent embedding", run: || guarded("embedding", checks::embedding) },
        Criterion { id: 3, title: "acoustic and Doppler dispersion", run: || guarded("dispersion", checks::dispersion) },
        Criterion { id: 4, title: "eigen-relation residual", run: || guarded("eigen relations", checks::eigen_relations) },
        Criterion { id: 5, title: "fast-operator inversion", run: || guarded("inversion", checks::inversion) },
        Criterion {
            id: 6,
            title: "conservation and circulation drifts",
            run: || {
                let mut v = guarded("conservation", checks::reduced_conservation);
                v.extend(guarded("circulation", checks::circulation_drifts));
                v
            },
        },
        Criterion { id: 7, title: "Reynolds stress closure", run: || guarded("reynolds", checks::reynolds_closure) },
        Criterion { id: 8, title: "GLM wave-action identity", run: || guarded("glm-identity", checks::glm_identity) },
        Criterion { id: 9, title: "slow-manifold invariance residual O(eps)", run: || guarded("invariance", checks::invariance_scaling) },
        Criterion {
            id: 10,
            title: "full-vs-reduced eps-convergence",
            run: || {
                let cfg = checks::cross_tier_config();
                guarded("cross-tier", || checks::cross_tier(&cfg))
            },
        },
    ]
}

pub fn run(c: &Criterion) -> CriterionResult {
    let start = std::time::Instant::now();
    let entries = (c.run)();
    let passed = !entries.is_empty() && entries.iter().all(|e| e.passed);
    CriterionResult { id: c.id, title: c.title, entries, passed, seconds: start.elapsed().as_secs_f64() }
}

/// Runs all criteria in order.
pub fn run_all() -> Vec<CriterionResult> {
    criteria().iter().map(run).collect()
}
