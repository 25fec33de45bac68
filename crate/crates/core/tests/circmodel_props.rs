use circrx::circmodel::*;
use circrx::netcore::Termination;
use circrx::C64;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = CirculatorParams> {
    (20.0..100.0f64, 0.0..20.0f64, 10.0..200.0f64, -80.0..80.0f64).prop_map(|(z0, rsw, ra, xa)| CirculatorParams {
        z0,
        rsw,
        zant: C64::new(ra, xa),
        ..Default::default()
    })
}

fn passive_zbal() -> impl Strategy<Value = Termination> {
    prop_oneof![
        Just(Termination::Open),
        (0.0..500.0f64, -300.0..300.0f64).prop_map(|(r, x)| Termination::Z(C64::new(r, x))),
    ]
}

fn reachable() -> impl Strategy<Value = CirculatorParams> {
    (20.0..100.0f64, 0.0..20.0f64, 0.2..0.99f64, -5.0..5.0f64).prop_map(|(z0, rsw, frac, xa)| CirculatorParams {
        z0,
        rsw,
        zant: C64::new(frac * z0, xa),
        ..Default::default()
    })
}

proptest! {
    #[test]
    fn balance_nulls_tx_leakage(p in reachable()) {
        if let Ok(b) = balance_condition(&p) {
            prop_assume!(b.passive);
            let v = C64::new(1.0, 0.0);
            let n = tx_excitation(&p.with_zbal(Termination::Z(b.zbal)), v).unwrap();
            prop_assert!(n.v1.norm() < 1e-12 * v.norm(), "{:e}", n.v1.norm());
        }
    }

    #[test]
    fn tx_to_ant_ignores_balance(p in params(), a in passive_zbal(), b in passive_zbal()) {
        let v = C64::new(1.0, 0.0);
        let x = tx_excitation(&p.with_zbal(a), v).unwrap().v_ant.norm();
        let y = tx_excitation(&p.with_zbal(b), v).unwrap().v_ant.norm();
        prop_assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn gyrator_relation_holds(p in params(), z in passive_zbal()) {
        let p = p.with_zbal(z);
        let v = C64::new(0.7, -0.3);
        for n in [tx_excitation(&p, v).unwrap(), ant_excitation(&p, v).unwrap()] {
            prop_assert!((n.v2 - C64::new(0.0, 1.0) * n.v1).norm() < 1e-12);
            prop_assert!(n.named().iter().all(|(_, x)| x.is_finite()));
        }
    }

    #[test]
    fn matched_nodes_stay_below_source(rsw in 0.0..20.0f64, z in passive_zbal()) {
        // Zant = Z0 keeps the network a passive load on both drives.
        let p = CirculatorParams { rsw, ..Default::default() }.with_zbal(z);
        let v = C64::new(1.0, 0.0);
        for n in [tx_excitation(&p, v).unwrap(), ant_excitation(&p, v).unwrap()] {
            for (name, x) in n.named() {
                prop_assert!(x.norm() <= v.norm() * (1.0 + 1e-12), "{name} {}", x.norm());
            }
        }
    }

    #[test]
    fn transfers_are_not_reciprocal(rsw in 0.0..20.0f64, z in passive_zbal()) {
        let p = CirculatorParams { rsw, ..Default::default() }.with_zbal(z);
        let opts = NetworkOptions::default();
        let v = C64::new(1.0, 0.0);
        let ant_to_rx = solve_network(&p, &opts, p.f0, Drive::Ant(v)).unwrap().v_rx.norm();
        let rx_to_ant = solve_network(&p, &opts, p.f0, Drive::Rx(v)).unwrap().v_ant.norm();
        prop_assert!((ant_to_rx - rx_to_ant).abs() > 1e-3, "{ant_to_rx} {rx_to_ant}");
    }

    #[test]
    fn sweep_rows_are_finite(p in params(), z in passive_zbal(), df in -0.2..0.2f64) {
        let p = p.with_zbal(z);
        let r = frequency_sweep(&p, LineModel::Ideal, &[p.f0 * (1.0 + df)]).unwrap();
        let row = r.rows[0];
        prop_assert!(row.singular || (row.tx_to_bb_isolation_db.is_finite() && row.ant_to_bb_gain_db.is_finite()));
        prop_assert!(row.singular || row.tx_to_bb_isolation_db <= circrx::tol::ISOLATION_CAP_DB);
    }
}

#[test]
fn open_balance_equals_the_limit_of_large_impedance() {
    let p = CirculatorParams::default();
    let v = C64::new(1.0, 0.0);
    let open = tx_excitation(&p, v).unwrap();
    let big = tx_excitation(&p.with_zbal(Termination::resistor(1e12)), v).unwrap();
    for ((_, a), (_, b)) in open.named().iter().zip(big.named()) {
        assert!((a - b).norm() < 1e-9);
    }
}

#[test]
fn nodal_solver_agrees_with_closed_form_for_random_points() {
    let opts = NetworkOptions::default();
    for (rsw, zbal) in [(0.0, 20.0), (3.5, 50.0), (10.0, 300.0)] {
        let p = CirculatorParams { rsw, zant: C64::new(70.0, 15.0), ..Default::default() }.with_zbal(Termination::resistor(zbal));
        let v = C64::new(1.0, 0.0);
        for (closed, drive) in [(tx_excitation(&p, v).unwrap(), Drive::Tx(v)), (ant_excitation(&p, v).unwrap(), Drive::Ant(v))] {
            let nodal = solve_network(&p, &opts, p.f0, drive).unwrap();
            for ((name, a), (_, b)) in closed.named().iter().zip(nodal.named()) {
                assert!((a - b).norm() < 1e-9, "{name} {a} {b}");
            }
        }
    }
}
