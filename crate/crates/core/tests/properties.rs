mod common;

use common::*;
use graphdesign::design::{cost_nonparametric, cost_parametric, select_j_frequency, select_j_projection};
use graphdesign::evaluate::{design_value, percent_error, true_mean};
use graphdesign::ingest::{aggregate_functions, haversine_km, snap_events, Event, EventLog, EventTime, PeriodFilter};
use graphdesign::lp::{build_lp_parts, solve_basic, SimplexOptions, DEFAULT_SUPPORT_TOL};
use graphdesign::{LatLon, RawEdge, WeightedGraph};
use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeMap;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn laplacian_quadratic_form_is_dirichlet_energy(seed in any::<u64>(), n in 2usize..30) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let x = random_vec(&mut r, n, -3.0, 3.0);
        let l = g.laplacian();
        let q = l.quadratic_form(&x);
        let e = g.dirichlet_energy(&x);
        prop_assert!((q - e).abs() <= 1e-9 * (1.0 + e.abs()));
        prop_assert!(q >= -1e-12);
        for i in 0..n {
            let row: f64 = (0..n).map(|j| l.get(i, j)).sum();
            prop_assert!(row.abs() < 1e-12);
        }
    }

    #[test]
    fn eigenbasis_is_orthonormal_and_diagonalizes(seed in any::<u64>(), n in 2usize..30) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n);
        let b = spectrum(&g);
        let l = g.laplacian();
        let scale = b.eigenvalues()[n - 1].max(1.0);
        for j in 0..n {
            let phi = b.eigenvector(j);
            let lphi: Vec<f64> = (0..n).map(|i| (0..n).map(|k| l.get(i, k) * phi[k]).sum()).collect();
            let res: f64 = lphi.iter().zip(phi).map(|(a, p)| (a - b.eigenvalue(j) * p).powi(2)).sum::<f64>().sqrt();
            prop_assert!(res <= 1e-7 * scale);
            for k in j..n {
                let want = if j == k { 1.0 } else { 0.0 };
                prop_assert!((dot(phi, b.eigenvector(k)) - want).abs() < 1e-9);
            }
        }
        prop_assert!(b.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(b.eigenvalue(0), 0.0);
    }

    #[test]
    fn projection_preserves_energy_and_reconstructs(seed in any::<u64>(), n in 2usize..30) {
        let mut r = rng(seed);
        let b = spectrum(&random_graph(&mut r, n));
        let f = random_vec(&mut r, n, -5.0, 5.0);
        let c = b.projection(&f).unwrap();
        let ef: f64 = f.iter().map(|x| x * x).sum();
        let ec: f64 = c.iter().map(|x| x * x).sum();
        prop_assert!((ef - ec).abs() <= 1e-9 * (1.0 + ef));
        prop_assert!((c[0] - true_mean(&f) * (n as f64).sqrt()).abs() <= 1e-9 * (1.0 + ef.sqrt()));
        let back = b.reconstruct(&c).unwrap();
        for (x, y) in f.iter().zip(&back) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + ef.sqrt()));
        }
    }

    #[test]
    fn nonparametric_cost_squares_sum_to_complement_size(seed in any::<u64>(), n in 2usize..30, jf in 0.0f64..1.0) {
        let mut r = rng(seed);
        let b = spectrum(&random_graph(&mut r, n));
        let size = 1 + ((n - 1) as f64 * jf) as usize;
        let j = random_j(&mut r, n, size);
        let c = cost_nonparametric(&b, &j).unwrap();
        let total: f64 = c.iter().map(|x| x * x).sum();
        prop_assert!((total - (n - size) as f64).abs() < 1e-9 * n as f64);
        prop_assert!(c.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn parametric_cost_vanishes_on_span_of_j(seed in any::<u64>(), n in 3usize..30, size in 1usize..6) {
        let mut r = rng(seed);
        let b = spectrum(&random_graph(&mut r, n));
        let j = random_j(&mut r, n, size.min(n));
        let coeffs: Vec<f64> = (0..n).map(|k| if j.contains(k) { r.gen_range(-2.0..2.0) } else { 0.0 }).collect();
        let fbar = b.reconstruct(&coeffs).unwrap();
        let c = cost_parametric(&b, &j, &fbar).unwrap();
        prop_assert!(c.iter().all(|&x| x.abs() < 1e-9));
    }

    #[test]
    fn selections_contain_constant_index(seed in any::<u64>(), n in 2usize..30, kf in 0.0f64..1.0) {
        let mut r = rng(seed);
        let b = spectrum(&random_graph(&mut r, n));
        let k = 1 + ((n - 1) as f64 * kf) as usize;
        let fbar = random_vec(&mut r, n, 0.0, 10.0);
        let freq = select_j_frequency(&b, k).unwrap();
        let proj = select_j_projection(&b, &fbar, k).unwrap();
        prop_assert_eq!(freq.indices.as_slice(), &(0..k).collect::<Vec<_>>()[..]);
        prop_assert_eq!(proj.indices.len(), k);
        prop_assert!(proj.indices.contains(0));
    }

    #[test]
    fn basic_solution_respects_support_bound_and_averages(seed in any::<u64>(), n in 2usize..40, size in 1usize..8) {
        let mut r = rng(seed);
        let b = spectrum(&random_graph(&mut r, n));
        let j = random_j(&mut r, n, size.min(n));
        let c = random_vec(&mut r, n, 0.0, 1.0);
        let lp = build_lp_parts(&b, &j, &c).unwrap();
        let d = solve_basic(&lp, &SimplexOptions::default(), DEFAULT_SUPPORT_TOL).unwrap();
        prop_assert!(d.support().len() <= j.len());
        prop_assert!(d.weights().iter().all(|&w| w >= 0.0));
        prop_assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-8);
        for jj in j.iter().skip(1) {
            prop_assert!(dot(b.eigenvector(jj), d.weights()).abs() < 1e-8);
        }
    }

    #[test]
    fn optimal_value_scales_with_cost(seed in any::<u64>(), n in 2usize..30, size in 1usize..6, s in 0.01f64..100.0) {
        let mut r = rng(seed);
        let b = spectrum(&random_graph(&mut r, n));
        let j = random_j(&mut r, n, size.min(n));
        let c = random_vec(&mut r, n, 0.0, 1.0);
        let cs: Vec<f64> = c.iter().map(|x| x * s).collect();
        let opts = SimplexOptions::default();
        let d1 = solve_basic(&build_lp_parts(&b, &j, &c).unwrap(), &opts, DEFAULT_SUPPORT_TOL).unwrap();
        let d2 = solve_basic(&build_lp_parts(&b, &j, &cs).unwrap(), &opts, DEFAULT_SUPPORT_TOL).unwrap();
        prop_assert!((d2.objective_value() - s * d1.objective_value()).abs() <= 1e-8 * (1.0 + s));
    }

    #[test]
    fn percent_error_is_scale_invariant(seed in any::<u64>(), n in 2usize..30, s in 0.01f64..100.0) {
        let mut r = rng(seed);
        let b = spectrum(&random_graph(&mut r, n));
        let j = random_j(&mut r, n, 2.min(n));
        let c = random_vec(&mut r, n, 0.0, 1.0);
        let d = solve_basic(&build_lp_parts(&b, &j, &c).unwrap(), &SimplexOptions::default(), DEFAULT_SUPPORT_TOL).unwrap();
        let f = random_vec(&mut r, n, 1.0, 10.0);
        let fs: Vec<f64> = f.iter().map(|x| x * s).collect();
        let (p1, p2) = (percent_error(&d, &f).unwrap(), percent_error(&d, &fs).unwrap());
        prop_assert!((p1 - p2).abs() <= 1e-9 * (1.0 + p1));
        let dv = design_value(&d, &fs).unwrap();
        prop_assert!((dv - s * design_value(&d, &f).unwrap()).abs() <= 1e-9 * (1.0 + dv.abs()));
    }
}

fn town(seed: u64, n: usize) -> (WeightedGraph, Vec<LatLon>) {
    let mut r = rng(seed);
    let (g0, pts) = geometric(&mut r, n, connectivity_radius(n), false);
    let coords: BTreeMap<u64, LatLon> = pts
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| (i as u64 + 1, LatLon::new(40.70 + 0.1 * y, -74.02 + 0.1 * x).unwrap()))
        .collect();
    let edges: Vec<RawEdge> = g0
        .edges()
        .iter()
        .map(|e| RawEdge::new(g0.external_id(e.u), g0.external_id(e.v), e.weight))
        .collect();
    let g = WeightedGraph::build(&edges, Some(&coords)).unwrap();
    let ll = g.coords().unwrap();
    (g, ll)
}

fn brute_nearest(coords: &[LatLon], p: LatLon) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &c) in coords.iter().enumerate() {
        let d = haversine_km(c, p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn snapping_matches_brute_force(seed in any::<u64>(), n in 2usize..60, m in 1usize..80) {
        let (g, coords) = town(seed, n);
        let mut r = rng(seed ^ 0x5eed);
        let events: Vec<Event> = (0..m)
            .map(|_| Event {
                position: LatLon::new(40.70 + 0.1 * r.gen::<f64>(), -74.02 + 0.1 * r.gen::<f64>()).unwrap(),
                time: "2016-06-01 08:00:00".parse::<EventTime>().unwrap(),
            })
            .collect();
        let log = EventLog::new(events.clone());
        let snapped = snap_events(&g, &log).unwrap();
        let (lat_lo, lat_hi) = coords.iter().fold((90.0_f64, -90.0_f64), |(a, b), c| (a.min(c.lat), b.max(c.lat)));
        let (lon_lo, lon_hi) = coords.iter().fold((180.0_f64, -180.0_f64), |(a, b), c| (a.min(c.lon), b.max(c.lon)));
        for (e, node) in events.iter().zip(&snapped.nodes) {
            let p = e.position;
            let inside = (lat_lo..=lat_hi).contains(&p.lat) && (lon_lo..=lon_hi).contains(&p.lon);
            let Some(got) = *node else {
                prop_assert!(!inside, "event inside the node hull was dropped");
                continue;
            };
            let want = brute_nearest(&coords, e.position);
            let (dg, dw) = (haversine_km(coords[got], e.position), haversine_km(coords[want], e.position));
            prop_assert!(got == want || dg == dw, "got {got} at {dg} km, want {want} at {dw} km");
        }

        // Order independence.
        let mut rev = events.clone();
        rev.reverse();
        let snapped_rev = snap_events(&g, &EventLog::new(rev)).unwrap();
        let mut back = snapped_rev.nodes.clone();
        back.reverse();
        prop_assert_eq!(back, snapped.nodes);
    }

    #[test]
    fn aggregation_counts_every_kept_event_once(seed in any::<u64>(), n in 2usize..30, m in 1usize..120) {
        let (g, _) = town(seed, n);
        let mut r = rng(seed ^ 0xa99);
        let events: Vec<Event> = (0..m)
            .map(|_| {
                let day = r.gen_range(1..=14);
                let hour = r.gen_range(0..24);
                Event {
                    position: LatLon::new(40.70 + 0.1 * r.gen::<f64>(), -74.02 + 0.1 * r.gen::<f64>()).unwrap(),
                    time: format!("2016-06-{day:02} {hour:02}:15:00").parse().unwrap(),
                }
            })
            .collect();
        let log = EventLog::new(events);
        let snapped = snap_events(&g, &log).unwrap();
        let filter = PeriodFilter {
            weekdays: PeriodFilter::parse_weekdays("mon-fri").unwrap(),
            window: Some(PeriodFilter::parse_window("07:00-10:00").unwrap()),
            ..PeriodFilter::default()
        };
        let kept = log
            .events
            .iter()
            .zip(&snapped.nodes)
            .filter(|(e, node)| node.is_some() && filter.period_of(&e.time).is_some())
            .count();
        match aggregate_functions(g.node_count(), &snapped, &log, &filter) {
            Ok(agg) => {
                let total: f64 = agg.signals.functions().iter().flatten().sum();
                prop_assert_eq!(total as usize, kept);
                prop_assert_eq!(agg.events_per_period.iter().sum::<usize>(), kept);
                for (f, &c) in agg.signals.functions().iter().zip(&agg.events_per_period) {
                    prop_assert_eq!(f.iter().sum::<f64>() as usize, c);
                }
            }
            Err(graphdesign::Error::EmptySignalSet) => prop_assert_eq!(kept, 0),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}
