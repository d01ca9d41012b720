mod common;

use std::fs::File;

use common::fixture_path;
use crn_game::experiments::{
    aggregate, read_aggregate, read_results, run_batch, write_results, BatchSpec, RunMetrics,
};
use crn_game::{GameKind, ScenarioParams};
use proptest::prelude::{any, prop, prop_assert_eq, proptest, Just, ProptestConfig, Strategy};

#[test]
fn aggregate_matches_independent_recomputation() {
    // The expected table was computed from the same CSV with pandas
    // (mean, population std, NaN rows dropped per metric).
    let rows = read_results(File::open(fixture_path("results20.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 20);
    let expected =
        read_aggregate(File::open(fixture_path("results20_aggregate.csv")).unwrap()).unwrap();
    let got = aggregate(&rows).unwrap();
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(&expected) {
        assert_eq!(
            (g.game, g.flows_requested, &g.metric, g.n),
            (e.game, e.flows_requested, &e.metric, e.n)
        );
        approx::assert_relative_eq!(g.mean, e.mean, max_relative = 1e-12);
        approx::assert_relative_eq!(g.std, e.std, max_relative = 1e-12, epsilon = 1e-15);
    }
}

#[test]
fn aggregate_of_empty_table_is_an_error() {
    assert!(aggregate(&[]).is_err());
}

fn small_batch(games: Vec<GameKind>, n_instances: usize) -> BatchSpec {
    let params = ScenarioParams {
        n_nodes: 60,
        side_length: 400.0,
        ..ScenarioParams::default()
    };
    BatchSpec {
        master_seed: 3,
        ..BatchSpec::new(params, vec![2, 4, 6, 8], n_instances, games)
    }
}

#[test]
fn one_instance_one_game_gives_one_row_per_flow_count() {
    let out = run_batch(&small_batch(vec![GameKind::Pfg], 1)).unwrap();
    assert!(out.failures.is_empty());
    assert_eq!(out.rows.len(), 4);
    let flows: Vec<usize> = out.rows.iter().map(|r| r.flows_requested).collect();
    assert_eq!(flows, vec![2, 4, 6, 8]);
}

#[test]
fn batch_csv_is_bit_identical_across_runs_and_thread_counts() {
    let spec = small_batch(GameKind::ALL.to_vec(), 3);
    let csv = |jobs| {
        let spec = BatchSpec {
            jobs,
            ..spec.clone()
        };
        let mut buf = Vec::new();
        write_results(&run_batch(&spec).unwrap().rows, &mut buf).unwrap();
        buf
    };
    let a = csv(Some(1));
    assert_eq!(a, csv(Some(1)));
    assert_eq!(a, csv(Some(3)));
    assert_eq!(a.iter().filter(|&&b| b == b'\n').count(), 1 + 4 * 3 * 4);
}

#[test]
fn games_of_a_cell_share_the_scenario() {
    let out = run_batch(&small_batch(GameKind::ALL.to_vec(), 2)).unwrap();
    for cell in out.rows.chunks(4) {
        let games: Vec<GameKind> = cell.iter().map(|r| r.game).collect();
        assert_eq!(games, GameKind::ALL.to_vec());
        assert!(cell.iter().all(|r| r.instance_id == cell[0].instance_id));
        for r in cell {
            assert!(r.flows_active <= r.flows_requested);
            if let Some(m) = r.mean_links_per_active_flow {
                assert!((1.0..=6.0).contains(&m));
            }
            assert!(r.normalized_flow_steps >= 0.0);
        }
    }
}

fn metrics() -> impl Strategy<Value = RunMetrics> {
    (
        0usize..1000,
        prop::sample::select(GameKind::ALL.to_vec()),
        1usize..100,
        any::<bool>(),
    )
        .prop_flat_map(|(instance_id, game, flows_requested, converged)| {
            (
                Just((instance_id, game, flows_requested, converged)),
                0..=flows_requested,
                prop::option::of(1.0f64..6.0),
                0.0f64..1e6,
            )
        })
        .prop_map(
            |((instance_id, game, flows_requested, converged), active, links, steps)| RunMetrics {
                instance_id,
                game,
                flows_requested,
                flows_active: active,
                mean_links_per_active_flow: links,
                normalized_flow_steps: steps,
                converged,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn results_csv_round_trips(rows in prop::collection::vec(metrics(), 0..20)) {
        let mut buf = Vec::new();
        write_results(&rows, &mut buf).unwrap();
        prop_assert_eq!(read_results(buf.as_slice()).unwrap(), rows);
    }
}
