mod common;

use std::collections::{BTreeMap, HashSet};

use dvbp::bounds::RemovalBudget;
use dvbp::exact::IlpOptions;
use dvbp::format::{
    certificate_from_json, certificate_to_json, instance_to_json, instance_to_text,
    packing_from_csv, packing_from_json, packing_to_csv, packing_to_json, parse_instance,
};
use dvbp::rational::ceil;
use dvbp::*;
use proptest::prelude::*;

fn instances(
    n_max: usize,
    d_max: usize,
    b_max: u64,
    t_max: u64,
) -> impl Strategy<Value = Instance> {
    (1..=d_max)
        .prop_flat_map(move |d| proptest::collection::vec(1..=b_max, d))
        .prop_flat_map(move |cap| {
            let demand: Vec<_> = cap.iter().map(|&b| 0..=b).collect();
            let rows = proptest::collection::vec((demand, 0..t_max, 1..=t_max), 0..=n_max);
            (Just(cap), rows)
        })
        .prop_map(|(cap, rows)| {
            let requests = rows
                .into_iter()
                .enumerate()
                .map(|(i, (demand, start, len))| {
                    Request::new(i as u32 + 1, demand, start, start + len)
                })
                .collect();
            Instance::new(cap, requests).unwrap()
        })
}

fn rules() -> impl Strategy<Value = &'static dyn PriorityRule> {
    prop::sample::select(priority_rules().to_vec())
}

fn active_count(instance: &Instance, t: u64) -> usize {
    instance
        .requests()
        .iter()
        .filter(|r| r.start <= t && t < r.end)
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn compression_keeps_intersections(inst in instances(12, 2, 6, 30)) {
        let (c, map) = compress_time(&inst);
        prop_assert!(common::same_intersections(&inst, &c));
        prop_assert!(c.requests().iter().all(|r| r.start >= 1 && r.start < r.end));
        prop_assert_eq!(c.horizon(), map.horizon());
        for (orig, comp) in inst.requests().iter().zip(c.requests()) {
            prop_assert_eq!(orig.id, comp.id);
            prop_assert_eq!(&orig.demand, &comp.demand);
            prop_assert_eq!(map.map(orig.start), Some(comp.start));
            prop_assert_eq!(map.map(orig.end), Some(comp.end));
        }
    }

    #[test]
    fn compression_is_idempotent(inst in instances(12, 2, 6, 30)) {
        let once = compress_time(&inst).0;
        prop_assert_eq!(compress_time(&once).0, once);
    }

    #[test]
    fn compression_reaches_the_monotone_minimum(inst in instances(6, 1, 3, 12)) {
        let c = compress_time(&inst).0;
        prop_assert_eq!(c.horizon(), common::min_horizon_monotone(&inst));
    }

    #[test]
    fn compression_reaches_the_unrestricted_minimum(inst in instances(4, 1, 3, 10)) {
        let c = compress_time(&inst).0;
        prop_assert_eq!(Some(c.horizon()), common::min_horizon_unrestricted(&inst, c.horizon()));
    }

    #[test]
    fn compression_preserves_statistics(inst in instances(12, 3, 6, 30)) {
        let c = compress_time(&inst).0;
        let (a, b) = (compute_stats(&inst), compute_stats(&c));
        prop_assert_eq!(a.n, b.n);
        prop_assert_eq!(a.height, b.height);
        prop_assert_eq!(a.flavors, b.flavors);
        prop_assert!(b.types <= a.types);
        prop_assert_eq!(lower_bound(&inst), lower_bound(&c));
    }

    #[test]
    fn stats_match_direct_counts(inst in instances(12, 3, 6, 20)) {
        let s = compute_stats(&inst);
        let height = (0..inst.horizon()).map(|t| active_count(&inst, t)).max().unwrap_or(0);
        prop_assert_eq!(s.height, height);
        prop_assert!(s.flavors <= s.types && s.types <= s.n);
        prop_assert_eq!(lower_bound(&inst), common::lower_bound_by_instants(&inst));
    }

    #[test]
    fn grouping_round_trips(inst in instances(15, 2, 4, 6)) {
        let table = group_types(&inst);
        prop_assert_eq!(table.total_multiplicity(), inst.len());
        prop_assert_eq!(table.len(), compute_stats(&inst).types);
        let mut back = table.ungroup();
        back.sort_by_key(|r| r.id);
        prop_assert_eq!(back, inst.requests().to_vec());
    }

    #[test]
    fn validation_is_idempotent(inst in instances(10, 3, 8, 20)) {
        let again = validate_instance(inst.to_raw(), ValidateOptions::default()).unwrap();
        prop_assert_eq!(again.instance, inst);
    }

    #[test]
    fn text_and_json_round_trip(inst in instances(10, 3, 8, 20)) {
        let text = instance_to_text(&inst);
        prop_assert_eq!(&parse_instance(&text, ValidateOptions::default()).unwrap().instance, &inst);
        let json = instance_to_json(&inst);
        prop_assert_eq!(&parse_instance(&json, ValidateOptions::default()).unwrap().instance, &inst);
        let reduced = reduce(&inst, Rational::new(1, 2), priority_rule("f2").unwrap(), Default::default()).unwrap();
        let text = instance_to_text(&reduced.instance);
        prop_assert_eq!(parse_instance(&text, ValidateOptions::default()).unwrap().instance, reduced.instance);
    }

    #[test]
    fn removal_bound_is_monotone(inst in instances(12, 3, 6, 10), k in 0u64..6) {
        for budget in [RemovalBudget::AsWritten, RemovalBudget::Scaled] {
            let u0 = upper_bound_removable(&inst, k, budget);
            let u1 = upper_bound_removable(&inst, k + 1, budget);
            prop_assert!(u0 <= u1);
            prop_assert!(u1 <= inst.len() as u64);
        }
        prop_assert!(
            upper_bound_removable(&inst, k, RemovalBudget::AsWritten)
                <= upper_bound_removable(&inst, k, RemovalBudget::Scaled)
        );
    }

    #[test]
    fn greedy_bin_is_feasible_and_maximal(inst in instances(14, 3, 6, 12), rule in rules()) {
        let ids: Vec<RequestId> = inst.ids().collect();
        let bin = greedy_pack_bin(&inst, &ids, rule).unwrap();
        let index = inst.id_index();
        let members: Vec<usize> = bin.iter().map(|id| index[id]).collect();
        prop_assert!(common::fits_one_bin(&inst, &members));
        let chosen: HashSet<_> = members.iter().copied().collect();
        for p in (0..inst.len()).filter(|p| !chosen.contains(p)) {
            let mut extended = members.clone();
            extended.push(p);
            prop_assert!(!common::fits_one_bin(&inst, &extended), "request at {} could still be added", p);
        }
        prop_assert_eq!(greedy_pack_bin(&inst, &ids, rule).unwrap(), bin);
    }

    #[test]
    fn heuristic_is_feasible_and_bounded(inst in instances(14, 3, 6, 12), rule in rules()) {
        let p = heuristic_solve(&inst, rule);
        prop_assert!(verify_packing(&inst, &p).unwrap().is_feasible());
        let lb = ceil(&lower_bound(&inst)) as u32;
        prop_assert!(lb <= p.bin_count() && p.bin_count() as usize <= inst.len());
    }

    #[test]
    fn reduction_lifts_within_budget(
        inst in instances(14, 3, 6, 12),
        rule in rules(),
        eps_num in 0i128..=6,
        recompress in any::<bool>(),
    ) {
        let eps = Rational::new(eps_num, 4);
        let options = ReductionOptions { recompress, ..Default::default() };
        let red = reduce(&inst, eps, rule, options).unwrap();
        let cert = &red.certificate;
        prop_assert!(cert.deletion_bins.len() as u64 <= cert.k_del);
        prop_assert_eq!(red.instance.len() + cert.deleted_count(), inst.len());
        prop_assert_eq!(&compress_time(&red.instance).0, &red.instance);
        let ids: HashSet<_> = red.instance.ids().collect();
        prop_assert!(cert.deleted_ids().all(|id| !ids.contains(&id)));

        let solution = heuristic_solve(&red.instance, rule);
        let lifted = lift_solution(cert, &solution, &inst).unwrap();
        prop_assert!(verify_packing(&inst, &lifted).unwrap().is_feasible());
        prop_assert!(lifted.bin_count() as u64 <= solution.bin_count() as u64 + cert.k_del);

        let back = certificate_from_json(certificate_to_json(cert).as_bytes()).unwrap();
        prop_assert_eq!(&back, cert);
    }

    #[test]
    fn reduction_is_deterministic(inst in instances(14, 2, 6, 12), rule in rules()) {
        let a = reduce(&inst, Rational::new(1, 2), rule, Default::default()).unwrap();
        let b = reduce(&inst, Rational::new(1, 2), rule, Default::default()).unwrap();
        prop_assert_eq!(a.instance, b.instance);
        prop_assert_eq!(a.certificate, b.certificate);
    }

    #[test]
    fn packing_formats_round_trip(inst in instances(14, 2, 6, 12)) {
        let p = heuristic_solve(&inst, priority_rule("f1").unwrap());
        prop_assert_eq!(&packing_from_csv(packing_to_csv(&p).as_bytes()).unwrap(), &p);
        prop_assert_eq!(&packing_from_json(packing_to_json(&p).as_bytes()).unwrap(), &p);
    }

    #[test]
    fn ilp_counts(inst in instances(10, 3, 6, 10), k in 1u32..4) {
        let c = compress_time(&inst).0;
        let model = export_ilp(&c, k, IlpOptions::default()).unwrap();
        let tau = group_types(&c).len();
        let k = k as usize;
        prop_assert_eq!(model.counts.integer_vars, tau * k);
        prop_assert_eq!(model.counts.binary_vars, k);
        prop_assert_eq!(model.counts.assign_rows, tau);
        prop_assert_eq!(model.counts.activate_rows, tau * k);
        let busy = (1..=c.horizon()).filter(|&t| active_count(&c, t) > 0).count();
        prop_assert_eq!(model.counts.resource_rows, busy * k * c.dimension());
        let plain = export_ilp(&c, k as u32, IlpOptions { dedup_consecutive: false }).unwrap();
        prop_assert_eq!(plain.lp, model.lp);
    }
}

#[test]
fn ilp_sidecar_names_match_the_model() {
    let inst = Instance::new(
        vec![4, 4],
        vec![
            Request::new(1, vec![1, 2], 1, 3),
            Request::new(2, vec![1, 2], 1, 3),
            Request::new(3, vec![3, 0], 2, 4),
        ],
    )
    .unwrap();
    let model = export_ilp(&inst, 2, IlpOptions::default()).unwrap();
    let sidecar: serde_json::Value = serde_json::from_str(&model.sidecar_json()).unwrap();
    let mut names = BTreeMap::new();
    for v in sidecar.as_array().unwrap() {
        names.insert(
            v["name"].as_str().unwrap().to_string(),
            v["kind"].as_str().unwrap().to_string(),
        );
    }
    for name in names.keys() {
        assert!(
            model.lp.contains(name.as_str()),
            "{name} missing from model"
        );
    }
    assert_eq!(names.values().filter(|k| *k == "integer").count(), 4);
}
