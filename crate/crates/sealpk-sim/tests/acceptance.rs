//! Acceptance suite: one test per criterion, each printing a PASS line on
//! success (run with `--nocapture` to see them; a failed assertion marks
//! the criterion FAIL through the harness).

use std::collections::VecDeque;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestRunner};

use sealpk_sim::event::{Op, Outcome, SyscallOp, TraceEvent};
use sealpk_sim::machine::SimConfig;
use sealpk_sim::mmu::{
    AccessKind, AccessRequest, EffectivePerm, PermPair, Prot, ProtectionKey, PteEntry, ThreadId,
    Vpn, effective_permission,
};
use sealpk_sim::scenario::{Scenario, ThreadSpec, evaluate_expectations, run_scenario};
use sealpk_sim::seal::{PkCam, SealReg};
use sealpk_sim::shadow_stack::{
    CaseStudyOptions, SHADOW_BASE_VPN, Variant, compare_costs, run_case_study,
};
use sealpk_sim::{FaultCause, builtins};

fn pass(criterion: u32, label: &str) {
    println!("ACCEPTANCE C{criterion} {label}: PASS");
}

fn vpn(v: u64) -> Vpn {
    Vpn::new(v).unwrap()
}

fn key(v: u16) -> ProtectionKey {
    ProtectionKey::new(v).unwrap()
}

fn ev(ia: u64, op: Op) -> TraceEvent {
    TraceEvent { ia, op }
}

fn run_builtin(name: &str, lazy: bool) -> (Scenario, sealpk_sim::Machine) {
    let mut scenario = builtins::builtin(name).unwrap_or_else(|| panic!("builtin {name}"));
    scenario.config.lazy_dealloc = lazy;
    let machine = run_scenario(&scenario);
    (scenario, machine)
}

fn assert_expectations(name: &str, lazy: bool) -> sealpk_sim::Machine {
    let (scenario, machine) = run_builtin(name, lazy);
    let report = evaluate_expectations(&scenario, &machine);
    assert!(
        report.all_met(),
        "{name} (lazy={lazy}): unmet: {:#?}",
        report
            .outcomes
            .iter()
            .filter(|o| o.status == sealpk_sim::scenario::ExpectationStatus::Unmet)
            .map(|o| (&o.expectation, &o.detail))
            .collect::<Vec<_>>()
    );
    machine
}

/// C1: RW page intersected with a write-disabled pair gives effective
/// read-only; the store faults with PkeyDenied. Exact, and fast.
#[test]
fn c01_worked_example_effective_permission() {
    let start = Instant::now();

    let mut pte = PteEntry::mapped(Prot::RW);
    pte.pkey = key(7);
    let eff = effective_permission(&pte, PermPair::READ_ONLY);
    assert_eq!(
        eff,
        EffectivePerm {
            read: true,
            write: false
        }
    );

    let req = AccessRequest {
        page: vpn(87),
        kind: AccessKind::Store,
        thread: ThreadId(0),
    };
    let fault = sealpk_sim::mmu::check_access_pte(&req, &pte, PermPair::READ_ONLY).unwrap_err();
    assert_eq!(fault.cause, FaultCause::PkeyDenied);
    assert_eq!(fault.pkey, key(7));
    assert_eq!(fault.page, Some(vpn(87)));

    // End to end through the machine as well.
    let scenario = Scenario {
        config: SimConfig::default(),
        threads: vec![ThreadSpec {
            id: ThreadId(0),
            events: vec![
                ev(
                    0,
                    Op::Mmap {
                        pages: sealpk_sim::PageRange::one(vpn(87)),
                        prot: Prot::RW,
                    },
                ),
                ev(
                    0,
                    Op::Syscall(SyscallOp::PkeyAlloc {
                        init: PermPair::READ_ONLY,
                    }),
                ),
                ev(
                    0,
                    Op::Syscall(SyscallOp::PkeyMprotect {
                        pages: sealpk_sim::PageRange::one(vpn(87)),
                        prot: Prot::RW,
                        pkey: key(1),
                    }),
                ),
                ev(0, Op::Store { page: vpn(87) }),
            ],
        }],
        expect: vec![],
    };
    let machine = run_scenario(&scenario);
    let fault = machine.log().faults().next().expect("store faulted");
    assert_eq!(fault.fault.cause, FaultCause::PkeyDenied);

    assert!(
        start.elapsed().as_secs() < 1,
        "criterion must run in under a second"
    );
    pass(
        1,
        "worked example: RW ∧ (RD=0,WD=1) = read-only, store PkeyDenied",
    );
}

/// C2: the 8 x 4 x 2 permission truth table matches a brute-force oracle.
#[test]
fn c02_permission_truth_table() {
    let mut checked = 0;
    for prot_bits in 0..8u8 {
        let prot = Prot::new(prot_bits & 1 != 0, prot_bits & 2 != 0, prot_bits & 4 != 0);
        for pair_bits in 0..4u64 {
            let pair = PermPair::from_bits(pair_bits);
            for kind in [AccessKind::Load, AccessKind::Store] {
                let pte = PteEntry::mapped(prot);
                let req = AccessRequest {
                    page: vpn(0),
                    kind,
                    thread: ThreadId(0),
                };
                let got = sealpk_sim::mmu::check_access_pte(&req, &pte, pair).is_ok();
                // Oracle: independent recomputation of the intersection.
                let want = match kind {
                    AccessKind::Load => (prot_bits & 1 != 0) && (pair_bits & 1 == 0),
                    AccessKind::Store => (prot_bits & 2 != 0) && (pair_bits & 2 == 0),
                };
                assert_eq!(
                    got, want,
                    "prot={prot_bits:03b} pair={pair_bits:02b} {kind:?}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 64);
    pass(
        2,
        "64-case permission truth table matches brute-force oracle",
    );
}

/// C3: exactly 1023 allocations from a fresh state, then NoFreeKey.
#[test]
fn c03_key_capacity() {
    let machine = assert_expectations("key-exhaustion", true);
    let successes = machine
        .log()
        .events()
        .filter(|e| matches!(e.outcome, Outcome::Value(_)))
        .count();
    assert_eq!(successes, 1023);
    let failures: Vec<_> = machine
        .log()
        .events()
        .filter(|e| {
            matches!(
                e.outcome,
                Outcome::Error(sealpk_sim::SyscallError::NoFreeKey)
            )
        })
        .collect();
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0].index, 1023);
    pass(3, "1023 allocations then NoFreeKey (key 0 reserved)");
}

/// C4: the use-after-free builtin passes in both modes; non-lazy exhibits
/// old/new pages sharing one key, lazy never re-issues a dirty key and
/// releases it exactly at page count zero.
#[test]
fn c04_use_after_free_both_modes() {
    // Non-lazy: stale sharing, asserted via page-table scan.
    let machine = assert_expectations("use-after-free", false);
    let table = machine.kernel().page_table();
    let tagged: Vec<u64> = table
        .iter()
        .filter(|(_, pte)| pte.pkey == key(1))
        .map(|(p, _)| p.value())
        .collect();
    assert_eq!(
        tagged,
        vec![10, 11, 20, 21],
        "old and new domain share key 1"
    );

    // Lazy: the second allocation returns a different key.
    let machine = assert_expectations("use-after-free", true);
    assert_eq!(
        machine.log().outcome_of(ThreadId(0), 4),
        Some(Outcome::Value(2))
    );

    // Lazy drain: the freed key is re-issued exactly when its counter
    // reaches zero, and never before.
    let machine = assert_expectations("use-after-free-drain", true);
    assert_eq!(machine.kernel().page_count(key(1)), 0);
    assert!(
        machine.kernel().is_allocated(key(1)),
        "key 1 re-allocated after drain"
    );
    // Both modes of the drain scenario pass their expectations.
    assert_expectations("use-after-free-drain", false);
    pass(
        4,
        "use-after-free reproduced (non-lazy) and prevented (lazy)",
    );
}

/// C5: the three attack scenarios behave as sealed: re-keying EPERM,
/// page-adding EPERM, out-of-range row write SealViolation with the row
/// unchanged, in-range write succeeding.
#[test]
fn c05_attack_suite() {
    let machine = assert_expectations("fig3-funcB", true);
    assert_eq!(
        machine.page_pkey(vpn(100)),
        Some(key(1)),
        "log pages keep their key"
    );

    let machine = assert_expectations("fig3-funcC", true);
    assert_eq!(machine.page_pkey(vpn(200)), Some(ProtectionKey::DEFAULT));

    let machine = assert_expectations("fig3-funcD", true);
    // In-range writes succeeded (events 6 and 8), the injected write
    // raised SealViolation and left the row unchanged.
    assert_eq!(machine.log().outcome_of(ThreadId(0), 6), Some(Outcome::Ok));
    assert_eq!(machine.log().outcome_of(ThreadId(0), 8), Some(Outcome::Ok));
    assert_eq!(
        machine.log().outcome_of(ThreadId(0), 9),
        Some(Outcome::Faulted(FaultCause::SealViolation))
    );
    assert_eq!(machine.pkr_pair(ThreadId(0), key(1)), PermPair::READ_ONLY);
    pass(
        5,
        "funcB/funcC blocked with EPERM, funcD gated with SealViolation",
    );
}

/// C6: the permission seal is a one-time fuse — a second commit fails and
/// the committed range is immutable over any subsequent trace. At least
/// 1000 randomized trials.
#[test]
fn c06_one_time_fuse() {
    let mut runner = TestRunner::new(ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    });
    let strategy = proptest::collection::vec((0u8..3, 0u16..6, 0u64..0x1000), 1..40);
    runner
        .run(&strategy, |ops| {
            let mut reg = SealReg::new();
            let mut cam = PkCam::new(4);
            let mut committed: Vec<Option<sealpk_sim::PermissibleRange>> = vec![None; 6];
            for (kind, k, addr) in ops {
                let k_id = k as usize;
                match kind {
                    0 => {
                        let _ = reg.seal_start(key(k), addr);
                    }
                    1 => {
                        let _ = reg.seal_end(key(k), addr);
                    }
                    _ => {
                        let result = reg.commit_perm_seal(&mut cam, key(k));
                        if committed[k_id].is_some() {
                            prop_assert!(result.is_err(), "second commit must fail");
                        } else if result.is_ok() {
                            committed[k_id] = reg.range(key(k));
                        }
                    }
                }
                // Sealed bits are monotone and ranges immutable.
                for (k_id, range) in committed.iter().enumerate() {
                    if let Some(range) = range {
                        prop_assert!(reg.is_sealed(key(k_id as u16)));
                        prop_assert_eq!(reg.range(key(k_id as u16)), Some(*range));
                    }
                }
            }
            Ok(())
        })
        .unwrap();
    pass(6, "one-time fuse over 1000 randomized trials");
}

/// C7: a blind whole-row write clobbers a row-mate's pair; the
/// read-modify-write variant preserves it. Final PKR state oracle.
#[test]
fn c07_row_write_semantics() {
    let trace = Scenario {
        config: SimConfig::default(),
        threads: vec![ThreadSpec {
            id: ThreadId(0),
            events: vec![
                ev(
                    0x100,
                    Op::Call {
                        fn_id: 0,
                        ret_addr: 0x4000,
                    },
                ),
                ev(0x104, Op::Return { ret_addr: 0x4000 }),
            ],
        }],
        expect: vec![],
    };
    let options = CaseStudyOptions {
        row_mate: Some(PermPair::DENY_ALL),
        ..CaseStudyOptions::default()
    };

    let wr = run_case_study(&trace, Variant::SealPkWr, &options).unwrap();
    let mate = wr.shadow.row_mate.unwrap();
    assert_eq!(wr.shadow.pkey.unwrap().row(), mate.row());
    assert_eq!(
        wr.machine.pkr_pair(ThreadId(0), mate),
        PermPair::UNRESTRICTED
    );

    let rdrw = run_case_study(&trace, Variant::SealPkRdRw, &options).unwrap();
    let mate = rdrw.shadow.row_mate.unwrap();
    assert_eq!(rdrw.machine.pkr_pair(ThreadId(0), mate), PermPair::DENY_ALL);

    // Both kept the shadow key itself read-only at rest.
    for run in [&wr, &rdrw] {
        assert_eq!(
            run.machine.pkr_pair(ThreadId(0), run.shadow.pkey.unwrap()),
            PermPair::READ_ONLY
        );
    }
    pass(
        7,
        "blind row write clobbers row-mate; read-modify-write preserves it",
    );
}

/// C8: smash traces are flagged under every variant; benign nested traces
/// of depth up to 64 yield zero flags; no non-instrumentation store to a
/// shadow page succeeds under the isolated variants.
#[test]
fn c08_shadow_stack_detection() {
    let smash = Scenario {
        config: SimConfig::default(),
        threads: vec![ThreadSpec {
            id: ThreadId(0),
            events: vec![
                ev(
                    0x100,
                    Op::Call {
                        fn_id: 0,
                        ret_addr: 0x4000,
                    },
                ),
                ev(
                    0x104,
                    Op::SmashStack {
                        slot: 0,
                        value: 0x666,
                    },
                ),
                ev(0x108, Op::Return { ret_addr: 0x4000 }),
            ],
        }],
        expect: vec![],
    };
    for variant in Variant::ALL {
        let run = run_case_study(&smash, variant, &CaseStudyOptions::default()).unwrap();
        assert_eq!(
            run.detection.mismatches.len(),
            1,
            "{variant} flags the smash"
        );
    }

    // Benign nested traces up to depth 64: zero flags everywhere.
    for depth in [1u32, 8, 64] {
        let mut events = Vec::new();
        for d in 0..depth {
            events.push(ev(
                0x100,
                Op::Call {
                    fn_id: d,
                    ret_addr: 0x4000 + d as u64,
                },
            ));
        }
        for d in (0..depth).rev() {
            events.push(ev(
                0x200,
                Op::Return {
                    ret_addr: 0x4000 + d as u64,
                },
            ));
        }
        let benign = Scenario {
            config: SimConfig::default(),
            threads: vec![ThreadSpec {
                id: ThreadId(0),
                events,
            }],
            expect: vec![],
        };
        for variant in Variant::ALL {
            let run = run_case_study(&benign, variant, &CaseStudyOptions::default()).unwrap();
            assert!(
                run.detection.clean(),
                "{variant} at depth {depth}: {:?}",
                run.detection
            );
        }
    }

    // Attacker stores at the shadow page never succeed under isolation.
    let attack = Scenario {
        config: SimConfig {
            continue_on_fault: true,
            ..SimConfig::default()
        },
        threads: vec![ThreadSpec {
            id: ThreadId(0),
            events: vec![
                ev(
                    0x100,
                    Op::Call {
                        fn_id: 0,
                        ret_addr: 0x4000,
                    },
                ),
                ev(
                    0x104,
                    Op::Store {
                        page: vpn(SHADOW_BASE_VPN),
                    },
                ),
                ev(0x108, Op::Return { ret_addr: 0x4000 }),
            ],
        }],
        expect: vec![],
    };
    for variant in [Variant::SealPkWr, Variant::SealPkRdRw, Variant::Mprotect] {
        let run = run_case_study(&attack, variant, &CaseStudyOptions::default()).unwrap();
        assert_eq!(
            run.detection.silent_shadow_writes, 0,
            "{variant} lets no store through"
        );
        assert_eq!(
            run.detection.blocked_shadow_stores, 1,
            "{variant} blocks and flags"
        );
    }
    let run = run_case_study(&attack, Variant::Unprotected, &CaseStudyOptions::default()).unwrap();
    assert_eq!(
        run.detection.silent_shadow_writes, 1,
        "unprotected corrupts silently"
    );
    pass(
        8,
        "smash flagged in all variants; benign clean; isolation holds",
    );
}

/// C9: with default costs the per-call toggle ratio mprotect over
/// sealpk-rdrw is 2188/310 ~ 7.06 (± 0.01) on a call-only trace, and the
/// ratio is monotone in the mprotect cost parameter.
#[test]
fn c09_cost_model_comparison() {
    let mut events = Vec::new();
    for d in 0..32u32 {
        events.push(ev(
            0x100,
            Op::Call {
                fn_id: d,
                ret_addr: 0x4000 + d as u64,
            },
        ));
    }
    let call_only = Scenario {
        config: SimConfig::default(),
        threads: vec![ThreadSpec {
            id: ThreadId(0),
            events,
        }],
        expect: vec![],
    };
    let report = compare_costs(&call_only, &CaseStudyOptions::default()).unwrap();
    let ratio = report.mprotect_over_rdrw;
    assert!(
        (ratio - 7.06).abs() <= 0.01,
        "toggle ratio {ratio} differs from 2188/310 by more than 0.01"
    );
    // Spot the toggle costs themselves.
    let row = |v: Variant| {
        report
            .rows
            .iter()
            .find(|r| r.variant == v)
            .unwrap()
            .toggle_cycles_per_call
    };
    assert_eq!(row(Variant::Mprotect), 2188.0);
    assert_eq!(row(Variant::SealPkRdRw), 310.0);

    // Monotonicity in the mprotect cost parameter.
    let mut last = 0.0;
    for cost in [100u64, 547, 1094, 2188, 8752] {
        let mut scenario = call_only.clone();
        scenario.config.cost.mprotect = cost;
        let swept = compare_costs(&scenario, &CaseStudyOptions::default()).unwrap();
        assert!(
            swept.mprotect_over_rdrw > last,
            "ratio not monotone at mprotect={cost}"
        );
        last = swept.mprotect_over_rdrw;
    }
    pass(
        9,
        "toggle ratio 2188/310 within ±0.01 and monotone in mprotect cost",
    );
}

/// C10: byte-identical logs on replay; gate decisions independent of CAM
/// capacity; thrash refill count matches the FIFO model.
#[test]
fn c10_determinism_and_cam_transparency() {
    // Determinism across distinct runs of the same scenarios.
    for name in builtins::NAMES {
        let (scenario, machine) = run_builtin(name, true);
        let again = run_scenario(&scenario);
        assert_eq!(
            machine.log().to_json(),
            again.log().to_json(),
            "{name}: replay diverged"
        );
    }

    // The thrash scenario: refills equal the independent FIFO model.
    let machine = assert_expectations("cam-thrash", true);
    let scenario = builtins::builtin("cam-thrash").unwrap();
    let mut fifo: VecDeque<u16> = VecDeque::new();
    let mut expected_refills = 0u64;
    let mut rows: std::collections::BTreeMap<usize, u64> = Default::default();
    let mut sealed: Vec<u16> = Vec::new();
    for event in &scenario.threads[0].events {
        match &event.op {
            Op::Syscall(SyscallOp::PkeyPermSeal { pkey }) => {
                if fifo.len() == 1 {
                    fifo.pop_front();
                }
                fifo.push_back(pkey.value());
                sealed.push(pkey.value());
            }
            Op::Wrpkr { pkey, row } => {
                let old = rows.entry(pkey.row()).or_insert(0);
                if sealed.contains(&pkey.value()) && *old != *row && !fifo.contains(&pkey.value()) {
                    expected_refills += 1;
                    if fifo.len() == 1 {
                        fifo.pop_front();
                    }
                    fifo.push_back(pkey.value());
                }
                *old = *row;
            }
            _ => {}
        }
    }
    assert_eq!(machine.log().refills(), expected_refills);
    assert_eq!(machine.cam_refills(), expected_refills);

    // Capacity sweep: decisions equal at every capacity, only refills move.
    let outcome_sig = |cam_capacity: usize| {
        let mut scenario = builtins::builtin("cam-thrash").unwrap();
        scenario.config.cam_capacity = cam_capacity;
        let machine = run_scenario(&scenario);
        let decisions: Vec<Outcome> = machine.log().events().map(|e| e.outcome).collect();
        (decisions, machine.log().refills())
    };
    let (reference, _) = outcome_sig(1024);
    for capacity in [1usize, 2, 3, 8] {
        let (decisions, _) = outcome_sig(capacity);
        assert_eq!(
            decisions, reference,
            "decisions changed at capacity {capacity}"
        );
    }
    pass(
        10,
        "byte-identical replay; CAM capacity transparent to decisions",
    );
}
