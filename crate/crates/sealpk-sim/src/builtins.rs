//! Shipped scenarios exercising the architecture's signature behaviors:
//! the three sealing attacks, the key use-after-free in both
//! de-allocation modes, write-only pages, key-space exhaustion, and
//! PK-CAM thrashing.

use crate::event::{Op, SyscallOp, TraceEvent};
use crate::machine::SimConfig;
use crate::mmu::{PermPair, ProtectionKey};
use crate::scenario::{Check, Expectation, Scenario, ThreadSpec, parse_scenario};

/// Names of all shipped scenarios.
pub const NAMES: [&str; 8] = [
    "fig3-funcB",
    "fig3-funcC",
    "fig3-funcD",
    "use-after-free",
    "use-after-free-drain",
    "write-only-page",
    "key-exhaustion",
    "cam-thrash",
];

/// One-line description per scenario, in [`NAMES`] order.
pub const DESCRIPTIONS: [&str; 8] = [
    "untrusted component re-keys a sealed domain's pages; denied with EPERM",
    "untrusted component adds pages to a page-sealed domain; denied with EPERM",
    "injected row write outside the permission-sealed range; raises SealViolation",
    "freed key with live pages: stale sharing when lazy_dealloc=false, fresh key when true",
    "lazily freed key becomes allocatable exactly when its page count drains to zero",
    "read-disabled pair over an RW page: stores succeed, loads fault",
    "1023 allocations succeed from a fresh state, the 1024th reports NoFreeKey",
    "two sealed keys alternating through a one-entry PK-CAM refill on every check",
];

/// Looks up a shipped scenario by name.
pub fn builtin(name: &str) -> Option<Scenario> {
    let parse = |text| Some(parse_scenario(text).expect("shipped scenario is valid"));
    match name {
        "fig3-funcB" => parse(include_str!("../scenarios/fig3-funcB.json")),
        "fig3-funcC" => parse(include_str!("../scenarios/fig3-funcC.json")),
        "fig3-funcD" => parse(include_str!("../scenarios/fig3-funcD.json")),
        "use-after-free" => parse(include_str!("../scenarios/use-after-free.json")),
        "use-after-free-drain" => parse(include_str!("../scenarios/use-after-free-drain.json")),
        "write-only-page" => parse(include_str!("../scenarios/write-only-page.json")),
        "key-exhaustion" => Some(key_exhaustion()),
        "cam-thrash" => Some(cam_thrash()),
        _ => None,
    }
}

fn thread0(events: Vec<TraceEvent>) -> Vec<ThreadSpec> {
    vec![ThreadSpec {
        id: crate::mmu::ThreadId(0),
        events,
    }]
}

fn expect(check: Check) -> Expectation {
    Expectation {
        when_lazy: None,
        check,
    }
}

/// 1024 back-to-back allocations: exactly 1023 succeed (key 0 is
/// reserved), then the allocator reports exhaustion.
fn key_exhaustion() -> Scenario {
    let t0 = crate::mmu::ThreadId(0);
    let events = (0..1024)
        .map(|i| TraceEvent {
            ia: 0x1000 + 4 * i as u64,
            op: Op::Syscall(SyscallOp::PkeyAlloc {
                init: PermPair::UNRESTRICTED,
            }),
        })
        .collect();
    Scenario {
        config: SimConfig::default(),
        threads: thread0(events),
        expect: vec![
            expect(Check::Returns {
                thread: t0,
                event: 0,
                value: 1,
            }),
            expect(Check::Returns {
                thread: t0,
                event: 511,
                value: 512,
            }),
            expect(Check::Returns {
                thread: t0,
                event: 1022,
                value: 1023,
            }),
            expect(Check::SyscallError {
                thread: t0,
                event: 1023,
                error: crate::kernel::SyscallError::NoFreeKey,
            }),
        ],
    }
}

/// Keys 1 and 33 (different PKR rows) are permission-sealed through a
/// one-entry PK-CAM; alternating in-range row writes then thrash it, one
/// refill per gate check after the first.
fn cam_thrash() -> Scenario {
    let k1 = ProtectionKey::new(1).unwrap();
    let k33 = ProtectionKey::new(33).unwrap();
    let mut events = vec![
        TraceEvent {
            ia: 0x1000,
            op: Op::SealStart {
                pkey: k1,
                addr: 0x4000,
            },
        },
        TraceEvent {
            ia: 0x1004,
            op: Op::SealEnd {
                pkey: k1,
                addr: 0x4fff,
            },
        },
        TraceEvent {
            ia: 0x1008,
            op: Op::Syscall(SyscallOp::PkeyPermSeal { pkey: k1 }),
        },
        TraceEvent {
            ia: 0x100c,
            op: Op::SealStart {
                pkey: k33,
                addr: 0x4000,
            },
        },
        TraceEvent {
            ia: 0x1010,
            op: Op::SealEnd {
                pkey: k33,
                addr: 0x4fff,
            },
        },
        TraceEvent {
            ia: 0x1014,
            op: Op::Syscall(SyscallOp::PkeyPermSeal { pkey: k33 }),
        },
    ];
    // Column 1 in each row; toggle the pair between deny-all and clear so
    // every write changes the sealed key's bits. Key 33 is the CAM
    // resident after the commits, so the first check hits.
    let wrpkrs = 8;
    for i in 0..wrpkrs {
        let pkey = if i % 2 == 0 { k33 } else { k1 };
        let row = if i % 4 < 2 { 0b11 << 2 } else { 0 };
        events.push(TraceEvent {
            ia: 0x4100 + 4 * i as u64,
            op: Op::Wrpkr { pkey, row },
        });
    }
    Scenario {
        config: SimConfig {
            cam_capacity: 1,
            ..SimConfig::default()
        },
        threads: thread0(events),
        expect: vec![
            expect(Check::NoFaults),
            expect(Check::Refills {
                count: wrpkrs as u64 - 1,
            }),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{evaluate_expectations, run_scenario};

    #[test]
    fn all_builtins_parse_and_validate() {
        for name in NAMES {
            let scenario = builtin(name).expect(name);
            crate::scenario::validate_scenario(&scenario).expect(name);
            assert!(!scenario.expect.is_empty(), "{name} has expectations");
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn all_builtins_meet_their_default_mode_expectations() {
        for name in NAMES {
            let scenario = builtin(name).unwrap();
            let machine = run_scenario(&scenario);
            let report = evaluate_expectations(&scenario, &machine);
            assert!(
                report.all_met(),
                "{name}: {:#?}",
                report
                    .outcomes
                    .iter()
                    .filter(|o| o.status == crate::scenario::ExpectationStatus::Unmet)
                    .map(|o| (&o.expectation, &o.detail))
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn builtins_survive_render_parse_round_trips() {
        for name in NAMES {
            let scenario = builtin(name).unwrap();
            let rendered = crate::scenario::render_scenario(&scenario);
            let reparsed = parse_scenario(&rendered).expect(name);
            assert_eq!(scenario, reparsed, "{name}");
        }
    }

    #[test]
    fn use_after_free_builtins_pass_in_non_lazy_mode_too() {
        for name in ["use-after-free", "use-after-free-drain"] {
            let mut scenario = builtin(name).unwrap();
            scenario.config.lazy_dealloc = false;
            let machine = run_scenario(&scenario);
            let report = evaluate_expectations(&scenario, &machine);
            assert!(report.all_met(), "{name} in non-lazy mode");
        }
    }
}
