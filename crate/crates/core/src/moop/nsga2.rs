//! Elitist non-dominated sorting genetic algorithm over integer-coded bit
//! allocations: binary tournament with feasibility dominance, uniform
//! crossover, ±1 mutation, and crowding-distance truncation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantizer::{BitAllocation, B_MAX_DEFAULT};

use super::evaluate::{Constraints, Evaluator, Individual, ParetoFront};

/// Solver controls with the reference defaults.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct Nsga2Config {
    pub pop_size: usize,
    pub generations: usize,
    pub b_max: u8,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self {
            pop_size: 200,
            generations: 300,
            b_max: B_MAX_DEFAULT,
        }
    }
}

/// Constrained domination: feasibility first, then smaller violation among
/// infeasible pairs, then Pareto domination among feasible pairs.
fn dominates(a: &Individual, b: &Individual) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => a.objectives.dominates(&b.objectives),
    }
}

/// Fast non-dominated sort; returns fronts of indices and writes `rank`.
pub fn fast_non_dominated_sort(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            if dominates(&pop[p], &pop[q]) {
                dominated[p].push(q);
            } else if dominates(&pop[q], &pop[p]) {
                count[p] += 1;
            }
        }
    }
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| count[p] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        for &p in &current {
            pop[p].rank = rank;
        }
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated[p] {
                count[q] -= 1;
                if count[q] == 0 {
                    next.push(q);
                }
            }
        }
        fronts.push(std::mem::take(&mut current));
        current = next;
        rank += 1;
    }
    fronts
}

/// Crowding distance over one front; boundary members get the infinite
/// sentinel. Writes `crowding`.
pub fn crowding_distance(pop: &mut [Individual], front: &[usize]) {
    for &i in front {
        pop[i].crowding = 0.0;
    }
    if front.len() <= 2 {
        for &i in front {
            pop[i].crowding = f64::INFINITY;
        }
        return;
    }
    for key in [
        |ind: &Individual| ind.objectives.f1_se,
        |ind: &Individual| ind.objectives.f2_ee,
    ] {
        let mut order = front.to_vec();
        order.sort_by(|&a, &b| key(&pop[a]).partial_cmp(&key(&pop[b])).unwrap());
        let lo = key(&pop[order[0]]);
        let hi = key(&pop[*order.last().unwrap()]);
        pop[order[0]].crowding = f64::INFINITY;
        pop[*order.last().unwrap()].crowding = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for w in order.windows(3) {
            let gap = (key(&pop[w[2]]) - key(&pop[w[0]])) / span;
            pop[w[1]].crowding += gap;
        }
    }
}

/// Smaller-is-better comparison used for truncation and tournaments:
/// rank first, then larger crowding, then the allocation as a stable
/// tie-break so runs are reproducible.
fn better(a: &Individual, b: &Individual) -> std::cmp::Ordering {
    a.rank
        .cmp(&b.rank)
        .then_with(|| b.crowding.partial_cmp(&a.crowding).unwrap())
        .then_with(|| a.allocation.flat().cmp(&b.allocation.flat()))
}

fn tournament<'a>(
    pop: &'a [Individual],
    rng: &mut impl Rng,
) -> &'a Individual {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    if better(a, b) == std::cmp::Ordering::Greater {
        b
    } else {
        a
    }
}

fn crossover(a: &[u8], b: &[u8], rng: &mut impl Rng) -> (Vec<u8>, Vec<u8>) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    for i in 0..x.len() {
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut x[i], &mut y[i]);
        }
    }
    (x, y)
}

fn mutate(genes: &mut [u8], b_max: u8, rng: &mut impl Rng) {
    let p = 1.0 / genes.len() as f64;
    for g in genes.iter_mut() {
        if rng.gen_bool(p) {
            let step: i16 = if rng.gen_bool(0.5) { 1 } else { -1 };
            *g = (*g as i16 + step).clamp(1, b_max as i16) as u8;
        }
    }
}

/// Runs the full loop and returns the feasible first front of the final
/// population, deduplicated by allocation. An infeasible-everywhere run
/// returns an empty front.
pub fn nsga2_run(
    evaluator: &Evaluator,
    constraints: &Constraints,
    solver: &Nsga2Config,
    seed: u64,
) -> Result<ParetoFront> {
    if solver.pop_size < 2 || solver.pop_size % 2 != 0 {
        return Err(Error::InvalidArgument(
            "population size must be even and at least 2".into(),
        ));
    }
    let cfg = evaluator.cfg;
    let len = cfg.n_total() + cfg.k_dl;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let make = |genes: Vec<u8>, ev: &Evaluator| {
        ev.individual(
            BitAllocation::from_flat(&genes, cfg.n_ul, cfg.n_dl, cfg.k_dl),
            constraints,
        )
    };
    let mut pop: Vec<Individual> = (0..solver.pop_size)
        .map(|_| {
            let genes: Vec<u8> = (0..len).map(|_| rng.gen_range(1..=solver.b_max)).collect();
            make(genes, evaluator)
        })
        .collect::<Result<_>>()?;
    let fronts = fast_non_dominated_sort(&mut pop);
    for f in &fronts {
        crowding_distance(&mut pop, f);
    }

    for _ in 0..solver.generations {
        let mut offspring = Vec::with_capacity(solver.pop_size);
        while offspring.len() < solver.pop_size {
            let pa = tournament(&pop, &mut rng).allocation.flat();
            let pb = tournament(&pop, &mut rng).allocation.flat();
            let (mut ca, mut cb) = crossover(&pa, &pb, &mut rng);
            mutate(&mut ca, solver.b_max, &mut rng);
            mutate(&mut cb, solver.b_max, &mut rng);
            offspring.push(make(ca, evaluator)?);
            if offspring.len() < solver.pop_size {
                offspring.push(make(cb, evaluator)?);
            }
        }
        let mut merged = pop;
        merged.append(&mut offspring);
        let fronts = fast_non_dominated_sort(&mut merged);
        for f in &fronts {
            crowding_distance(&mut merged, f);
        }
        let mut next: Vec<Individual> = Vec::with_capacity(solver.pop_size);
        for front in &fronts {
            if next.len() + front.len() <= solver.pop_size {
                next.extend(front.iter().map(|&i| merged[i].clone()));
            } else {
                let mut rest: Vec<Individual> =
                    front.iter().map(|&i| merged[i].clone()).collect();
                rest.sort_by(better);
                rest.truncate(solver.pop_size - next.len());
                next.extend(rest);
            }
            if next.len() == solver.pop_size {
                break;
            }
        }
        pop = next;
    }

    let fronts = fast_non_dominated_sort(&mut pop);
    let mut members: Vec<Individual> = fronts
        .first()
        .map(|f| f.iter().map(|&i| pop[i].clone()).collect())
        .unwrap_or_default();
    members.retain(|ind| ind.feasible);
    members.sort_by(|a, b| a.allocation.flat().cmp(&b.allocation.flat()));
    members.dedup_by(|a, b| a.allocation == b.allocation);
    Ok(ParetoFront { members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moop::evaluate::Objectives;
    use crate::power::PowerParams;
    use crate::rates::Scheme;
    use crate::scenario::{self, large_scale_fading, sample_geometry, SystemConfig};

    fn individual(f1: f64, f2: f64, feasible: bool, violation: f64) -> Individual {
        Individual {
            allocation: BitAllocation::uniform(1, 1, 1, 1),
            objectives: Objectives { f1_se: f1, f2_ee: f2 },
            feasible,
            violation,
            rank: 0,
            crowding: 0.0,
        }
    }

    #[test]
    fn sort_by_inspection() {
        let mut pop = vec![
            individual(1.0, 2.0, true, 0.0),
            individual(2.0, 1.0, true, 0.0),
            individual(0.0, 0.0, true, 0.0),
        ];
        let fronts = fast_non_dominated_sort(&mut pop);
        assert_eq!(fronts, vec![vec![0, 1], vec![2]]);
        assert_eq!(pop[2].rank, 1);
    }

    #[test]
    fn feasibility_beats_objectives() {
        let mut pop = vec![
            individual(10.0, 10.0, false, 1.0),
            individual(1.0, 1.0, true, 0.0),
            individual(5.0, 5.0, false, 2.0),
        ];
        let fronts = fast_non_dominated_sort(&mut pop);
        assert_eq!(fronts, vec![vec![1], vec![0], vec![2]]);
    }

    #[test]
    fn boundary_crowding_is_infinite() {
        let mut pop = vec![
            individual(0.0, 3.0, true, 0.0),
            individual(1.0, 2.0, true, 0.0),
            individual(2.0, 1.0, true, 0.0),
            individual(3.0, 0.0, true, 0.0),
        ];
        let front: Vec<usize> = (0..4).collect();
        crowding_distance(&mut pop, &front);
        assert!(pop[0].crowding.is_infinite());
        assert!(pop[3].crowding.is_infinite());
        assert!(pop[1].crowding.is_finite() && pop[1].crowding > 0.0);
        assert!(pop[2].crowding.is_finite());
    }

    /// Brute-force domination-count sort used as an oracle.
    fn oracle_sort(pop: &[Individual]) -> Vec<usize> {
        let n = pop.len();
        let mut rank = vec![0usize; n];
        let mut assigned = vec![false; n];
        let mut level = 0;
        while assigned.iter().any(|&a| !a) {
            let layer: Vec<usize> = (0..n)
                .filter(|&p| {
                    !assigned[p]
                        && (0..n).all(|q| assigned[q] || q == p || !dominates(&pop[q], &pop[p]))
                })
                .collect();
            for &p in &layer {
                rank[p] = level;
            }
            for &p in &layer {
                assigned[p] = true;
            }
            level += 1;
        }
        rank
    }

    #[test]
    fn sort_matches_brute_force_on_random_points() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pop: Vec<Individual> = (0..100)
            .map(|_| {
                let feasible = rng.gen_bool(0.8);
                individual(
                    (rng.gen_range(0..10) as f64) / 2.0,
                    (rng.gen_range(0..10) as f64) / 2.0,
                    feasible,
                    if feasible { 0.0 } else { rng.gen_range(1..5) as f64 },
                )
            })
            .collect();
        let expected = oracle_sort(&pop);
        fast_non_dominated_sort(&mut pop);
        let got: Vec<usize> = pop.iter().map(|i| i.rank).collect();
        assert_eq!(got, expected);
    }

    fn reduced_scenario() -> (SystemConfig, crate::scenario::ChannelStats<f64>) {
        let mut cfg = scenario::test_config();
        cfg.n_ul = 1;
        cfg.n_dl = 1;
        cfg.k_ul = 1;
        cfg.k_dl = 1;
        cfg.m = 4;
        cfg.tau1 = 2;
        cfg.tau2 = 2;
        let stats = large_scale_fading(&sample_geometry(&cfg, 9).unwrap(), &cfg);
        (cfg, stats)
    }

    fn brute_force_front(ev: &Evaluator, cons: &Constraints, b_max: u8) -> Vec<Vec<u8>> {
        let mut all = Vec::new();
        for a in 1..=b_max {
            for b in 1..=b_max {
                for c in 1..=b_max {
                    let ind = ev
                        .individual(
                            BitAllocation::from_flat(&[a, b, c], 1, 1, 1),
                            cons,
                        )
                        .unwrap();
                    all.push(ind);
                }
            }
        }
        let mut front: Vec<Vec<u8>> = all
            .iter()
            .filter(|p| {
                p.feasible
                    && !all
                        .iter()
                        .any(|q| q.feasible && q.objectives.dominates(&p.objectives))
            })
            .map(|p| p.allocation.flat())
            .collect();
        front.sort();
        front
    }

    #[test]
    fn front_equals_brute_force_on_reduced_scenario() {
        let (cfg, stats) = reduced_scenario();
        let power = PowerParams::default();
        let ev = Evaluator::new(&cfg, &stats, Scheme::Mr, &power);
        let cons = Constraints {
            b_budget: Constraints::full_budget(&cfg, 4),
            ..Constraints::budget_only(&cfg)
        };
        let solver = Nsga2Config {
            pop_size: 40,
            generations: 40,
            b_max: 4,
        };
        let front = nsga2_run(&ev, &cons, &solver, 5).unwrap();
        let got: Vec<Vec<u8>> = front.members.iter().map(|m| m.allocation.flat()).collect();
        let expected = brute_force_front(&ev, &cons, 4);
        assert_eq!(got, expected);
    }

    #[test]
    fn front_is_mutually_non_dominated_and_feasible() {
        let (cfg, stats) = reduced_scenario();
        let power = PowerParams::default();
        let ev = Evaluator::new(&cfg, &stats, Scheme::Zf, &power);
        let cons = ev.default_constraints().unwrap();
        let solver = Nsga2Config {
            pop_size: 30,
            generations: 30,
            b_max: 8,
        };
        let front = nsga2_run(&ev, &cons, &solver, 3).unwrap();
        assert!(!front.members.is_empty());
        for a in &front.members {
            assert!(a.feasible);
            for b in &front.members {
                assert!(!a.objectives.dominates(&b.objectives) || a.allocation == b.allocation);
            }
        }
    }

    #[test]
    fn infeasible_everywhere_returns_empty_front() {
        let (cfg, stats) = reduced_scenario();
        let power = PowerParams::default();
        let ev = Evaluator::new(&cfg, &stats, Scheme::Mr, &power);
        let cons = Constraints {
            r_ul_min: 10.0,
            r_dl_min: 10.0,
            ..Constraints::budget_only(&cfg)
        };
        let solver = Nsga2Config {
            pop_size: 10,
            generations: 5,
            b_max: 4,
        };
        let front = nsga2_run(&ev, &cons, &solver, 1).unwrap();
        assert!(front.members.is_empty());
    }

    #[test]
    fn deterministic_per_seed() {
        let (cfg, stats) = reduced_scenario();
        let power = PowerParams::default();
        let ev = Evaluator::new(&cfg, &stats, Scheme::Mr, &power);
        let cons = Constraints {
            b_budget: Constraints::full_budget(&cfg, 4),
            ..Constraints::budget_only(&cfg)
        };
        let solver = Nsga2Config {
            pop_size: 10,
            generations: 10,
            b_max: 4,
        };
        let a = nsga2_run(&ev, &cons, &solver, 2).unwrap();
        let b = nsga2_run(&ev, &cons, &solver, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_odd_population() {
        let (cfg, stats) = reduced_scenario();
        let power = PowerParams::default();
        let ev = Evaluator::new(&cfg, &stats, Scheme::Mr, &power);
        let cons = Constraints::budget_only(&cfg);
        let solver = Nsga2Config {
            pop_size: 7,
            generations: 1,
            b_max: 4,
        };
        assert!(nsga2_run(&ev, &cons, &solver, 0).is_err());
    }
}
