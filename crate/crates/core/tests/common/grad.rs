use afair::dataio::{Record, SubPopulation};
use afair::models::{loss, loss_grad, loss_target, Architecture, LossKind, ModelParams};
use afair::siamese::{laf_eval, FairnessSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Loss,
    Lagrangian,
}

#[derive(Debug, Default, Clone, Copy)]
pub struct CheckStats {
    pub draws: usize,
    pub probes: usize,
    /// Probes dropped because the two step sizes disagreed (a kink nearby).
    pub skipped: usize,
    pub worst: f64,
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

struct Draw {
    model: ModelParams,
    subpop: SubPopulation,
    y: usize,
    lambdas: Vec<f64>,
    kind: LossKind,
    spec: FairnessSpec,
}

impl Draw {
    fn value(&self, params: &[f64], objective: Objective) -> f64 {
        let mut m = self.model.clone();
        m.params.copy_from_slice(params);
        match objective {
            Objective::Loss => {
                let target = loss_target(self.kind, self.y, m.output_dim());
                loss(
                    self.kind,
                    &target,
                    &m.forward(&self.subpop.origin().input()).unwrap(),
                )
            }
            Objective::Lagrangian => {
                laf_eval(
                    &self.subpop,
                    self.y,
                    &m,
                    &self.lambdas,
                    self.kind,
                    &self.spec,
                    false,
                )
                .unwrap()
                .value
            }
        }
    }

    fn gradient(&self, objective: Objective) -> Vec<f64> {
        match objective {
            Objective::Loss => {
                let input = self.subpop.origin().input();
                let out = self.model.forward(&input).unwrap();
                let target = loss_target(self.kind, self.y, out.len());
                self.model
                    .backward(&input, &loss_grad(self.kind, &target, &out))
                    .unwrap()
            }
            Objective::Lagrangian => laf_eval(
                &self.subpop,
                self.y,
                &self.model,
                &self.lambdas,
                self.kind,
                &self.spec,
                true,
            )
            .unwrap()
            .grad
            .unwrap(),
        }
    }

    fn directional(&self, dir: &[f64], h: f64, objective: Objective) -> f64 {
        let shift = |s: f64| -> Vec<f64> {
            self.model
                .params
                .iter()
                .zip(dir)
                .map(|(p, d)| p + s * d)
                .collect()
        };
        (self.value(&shift(h), objective) - self.value(&shift(-h), objective)) / (2.0 * h)
    }
}

fn random_draw(
    arch: &Architecture,
    kind: LossKind,
    output_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Draw {
    let (nx, na) = (rng.gen_range(2..6), rng.gen_range(1..3));
    let mut model = ModelParams::init(arch.clone(), nx + na, output_dim, rng.gen()).unwrap();
    for p in &mut model.params {
        *p += rng.gen_range(-0.3..0.3);
    }
    let y = rng.gen_range(0..output_dim.max(2));
    let origin = Record::new(
        (0..nx).map(|_| rng.gen()).collect(),
        (0..na).map(|_| rng.gen()).collect(),
        y,
    );
    let mut members = vec![origin.clone()];
    for _ in 0..rng.gen_range(1..5) {
        let mut m = origin.clone();
        m.a = (0..na).map(|_| rng.gen()).collect();
        members.push(m);
    }
    let lambdas = (0..members.len())
        .map(|_| rng.gen_range(0.05..2.0))
        .collect();
    Draw {
        model,
        subpop: SubPopulation { members },
        y,
        lambdas,
        kind,
        spec: FairnessSpec::new(rng.gen_range(0.0..2.0)),
    }
}

/// Compare analytic gradients with central differences along random unit
/// directions and single coordinates. A probe whose difference quotients at
/// `STEP` and `STEP / 10` disagree straddles a kink; it is dropped and counted.
pub fn check(
    arch: &Architecture,
    kind: LossKind,
    output_dim: usize,
    objective: Objective,
    draws: usize,
    seed: u64,
) -> CheckStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = CheckStats::default();
    while stats.draws < draws {
        let draw = random_draw(arch, kind, output_dim, &mut rng);
        let grad = draw.gradient(objective);
        let n = grad.len();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for _ in 0..3 {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            dirs.push(v.into_iter().map(|x| x / norm).collect());
        }
        for _ in 0..5 {
            let mut e = vec![0.0; n];
            e[rng.gen_range(0..n)] = 1.0;
            dirs.push(e);
        }
        let mut ok = 0;
        for dir in &dirs {
            let coarse = draw.directional(dir, STEP, objective);
            let fine = draw.directional(dir, STEP / 10.0, objective);
            if relative_error(coarse, fine) > TOLERANCE {
                stats.skipped += 1;
                continue;
            }
            let analytic: f64 = grad.iter().zip(dir).map(|(g, d)| g * d).sum();
            stats.worst = stats.worst.max(relative_error(analytic, coarse));
            stats.probes += 1;
            ok += 1;
        }
        if ok > 0 {
            stats.draws += 1;
        }
    }
    stats
}
