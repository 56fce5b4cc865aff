mod common;

use common::{config, realization};
use gensemcom::benchmarks::{fopg_assignment, run_fodpg, run_fopg, run_proposed, run_suo};
use gensemcom::experiment::{trial_rng, StreamRole};
use gensemcom::inner::SolverSettings;
use gensemcom::matching::{slj_from, Evaluator, SljSettings};
use gensemcom::model::{check_feasible, Assignment, Choice};
use gensemcom::Error;

#[test]
fn single_server_takes_everyone() {
    let mut c = config(3, 1);
    c.server_capacity = 3;
    let net = realization(&c, 31, 0);
    let a = fopg_assignment(&net).unwrap();
    assert!(a.choices().iter().all(|&c| c == Choice::Offload(0)));
}

#[test]
fn fopg_follows_strongest_uplink_with_overflow() {
    let c = config(4, 4);
    for t in 0..20 {
        let net = realization(&c, 32, t);
        let a = fopg_assignment(&net).unwrap();
        assert!(a.respects_capacity(&net.servers));
        assert_eq!(a.offloaded_count(), 4);
        // with capacity 3 at most one transmitter can be displaced
        let displaced = (0..4)
            .filter(|&n| {
                let best = (0..4)
                    .max_by(|&x, &y| net.gains.up[n][x].total_cmp(&net.gains.up[n][y]))
                    .unwrap();
                a.0[n] != Choice::Offload(best)
            })
            .count();
        assert!(displaced <= 1);
    }
}

#[test]
fn fopg_needs_enough_capacity() {
    let mut c = config(4, 1);
    c.server_capacity = 3;
    let net = realization(&c, 33, 0);
    assert!(matches!(
        run_fopg(&net, &SolverSettings::default()),
        Err(Error::InsufficientCapacity { capacity: 3, transmitters: 4 })
    ));
}

#[test]
fn every_scheme_returns_feasible_resources() {
    let c = config(4, 4);
    let st = SolverSettings::default();
    for t in 0..15 {
        let net = realization(&c, 34, t);
        let mut rng = trial_rng(34, t, StreamRole::Matching);
        let outs = [
            run_proposed(&net, &SljSettings::default(), &mut rng),
            run_fopg(&net, &st).unwrap(),
            run_fodpg(&net, &st),
            run_suo(&net, &SljSettings::default(), &mut rng),
        ];
        for o in &outs {
            assert!(o.feasible());
            assert!(check_feasible(&o.assignment, &o.solution.resources, &net).feasible());
            for (n, p) in o.outcomes().iter().enumerate() {
                assert_eq!(p.quality, net.quality(n, o.assignment.0[n]));
            }
        }
    }
}

#[test]
fn fodpg_is_the_all_local_matching() {
    let net = realization(&config(4, 4), 35, 0);
    let st = SolverSettings::default();
    let eval = Evaluator::new(&net, st);
    let fodpg = run_fodpg(&net, &st);
    assert_eq!(fodpg.objective, eval.utility(&Assignment::all_local(4)));
    assert!(fodpg.outcomes().iter().all(|o| o.quality == 57.1 || o.quality == 62.0));
}

#[test]
fn fodpg_pairs_do_not_interact() {
    let net = realization(&config(4, 4), 36, 0);
    let st = SolverSettings::default();
    let full = run_fodpg(&net, &st);
    let mut smaller = net.clone();
    smaller.transmitters.remove(2);
    smaller.gains.direct.remove(2);
    smaller.gains.up.remove(2);
    for row in &mut smaller.gains.down {
        row.remove(2);
    }
    for s in &mut smaller.servers {
        s.edge_model.quality.remove(2);
    }
    let part = run_fodpg(&smaller, &st);
    let kept: Vec<_> = full.outcomes().iter().enumerate().filter(|(n, _)| *n != 2).map(|(_, o)| *o).collect();
    assert_eq!(part.outcomes(), &kept[..]);
}

#[test]
fn suo_objective_is_unit_quality_utility() {
    let c = config(4, 4);
    for t in 0..10 {
        let net = realization(&c, 37, t);
        let suo = run_suo(&net, &SljSettings::default(), &mut trial_rng(37, t, StreamRole::Matching));
        let unit = net.with_unit_quality();
        let eval = Evaluator::new(&unit, SolverSettings::default());
        assert_eq!(suo.objective, eval.utility(&suo.assignment));
        assert_eq!(suo.objective, suo.max_latency());
    }
}

#[test]
fn equal_qualities_make_suo_and_proposed_agree() {
    let c = config(4, 3);
    for t in 0..10 {
        let mut net = realization(&c, 38, t);
        for tx in &mut net.transmitters {
            tx.device_model.quality = 70.0;
        }
        for s in &mut net.servers {
            s.edge_model.quality.iter_mut().for_each(|q| *q = 70.0);
        }
        let p = run_proposed(&net, &SljSettings::default(), &mut trial_rng(38, t, StreamRole::Matching));
        let s = run_suo(&net, &SljSettings::default(), &mut trial_rng(38, t, StreamRole::Matching));
        assert_eq!(p.assignment, s.assignment);
    }
}

#[test]
fn stuck_all_local_start_reproduces_fodpg() {
    let net = realization(&config(3, 0), 39, 0);
    let st = SolverSettings::default();
    let eval = Evaluator::new(&net, st);
    let out = slj_from(Assignment::all_local(3), &eval, 100);
    assert!(out.trace.is_empty());
    assert_eq!(out.matching.utility(), run_fodpg(&net, &st).objective);
}
