use overtake_core::world::{
    check_collision, step_ego, step_world, EventKind, KinematicLimits, Lane, Npc, RoadModel, VehicleState, WorldParams,
    WorldState,
};
use proptest::prelude::*;

fn params() -> WorldParams<f64> {
    WorldParams {
        road: RoadModel::new(300.0, 3.0, 110.0).unwrap(),
        limits: KinematicLimits::default(),
        dt: 0.05,
        t_max: 60.0,
    }
}

fn car(s: f64, d: f64, heading: f64, speed: f64) -> VehicleState<f64> {
    VehicleState::new(s, d, speed, 4.0, 1.8).with_heading(heading)
}

proptest! {
    #[test]
    fn collision_check_is_symmetric(
        s1 in -10.0..10.0f64, d1 in -5.0..5.0f64, h1 in -1.5..1.5f64,
        s2 in -10.0..10.0f64, d2 in -5.0..5.0f64, h2 in -1.5..1.5f64,
    ) {
        let (a, b) = (car(s1, d1, h1, 1.0), car(s2, d2, h2, 1.0));
        prop_assert_eq!(check_collision(&a, &b), check_collision(&b, &a));
    }

    #[test]
    fn substepping_converges(
        speed in 0.5..4.2f64, steering in -0.5..0.5f64, accel in -2.0..2.0f64, heading in -0.3..0.3f64,
    ) {
        let limits = KinematicLimits::default();
        let start = car(0.0, 0.0, heading, speed);
        let run = |dt: f64, n: usize| {
            let mut x = start;
            for _ in 0..n {
                x = step_ego(&x, steering, accel, dt, &limits).unwrap();
            }
            x
        };
        // One second of motion at three resolutions; the finest is the reference.
        let fine = run(0.0005, 2000);
        let coarse = run(0.05, 20);
        let finer = run(0.005, 200);
        let err = |x: VehicleState<f64>| (x.s - fine.s).hypot(x.d - fine.d);
        let (e_coarse, e_finer) = (err(coarse), err(finer));
        prop_assume!(e_coarse > 1e-9);
        prop_assert!(e_finer < e_coarse / 5.0, "coarse {e_coarse} finer {e_finer}");
    }

    #[test]
    fn npc_lateral_offset_never_changes(s in 0.0..200.0f64, speed in 0.0..4.0f64, steps in 1usize..400, oncoming in any::<bool>()) {
        let p = params();
        let lane = if oncoming { Lane::Opposite } else { Lane::Ego };
        let npc = Npc::on_lane(1, &p.road, lane, s, speed, 4.0, 1.8);
        let d0 = npc.state.d;
        let mut world = WorldState::new(car(-100.0, 0.0, 0.0, 0.0), vec![npc]).unwrap();
        for _ in 0..steps {
            if world.is_terminated() {
                break;
            }
            world = step_world(&world, 0.0, 0.0, &p).unwrap();
            prop_assert_eq!(world.npcs[0].state.d, d0);
        }
    }

    #[test]
    fn time_advances_and_speed_stays_nonnegative(
        steering in -0.5..0.5f64, accel in -3.0..3.0f64, speed in 0.0..4.2f64, steps in 1usize..300,
    ) {
        let p = params();
        let mut world = WorldState::new(car(0.0, 0.0, 0.0, speed), vec![]).unwrap();
        for k in 1..=steps {
            if world.is_terminated() {
                break;
            }
            let next = step_world(&world, steering, accel, &p).unwrap();
            prop_assert!(next.ego.speed >= 0.0);
            prop_assert!((next.time - k as f64 * p.dt).abs() < 1e-9);
            prop_assert!(next.time > world.time);
            world = next;
        }
    }

    #[test]
    fn terminal_events_are_exclusive_and_latch(
        npc_s in 3.0..40.0f64, steering in -0.5..0.5f64, accel in 0.0..2.0f64,
    ) {
        let p = params();
        let npc = Npc::on_lane(1, &p.road, Lane::Ego, npc_s, 0.0, 4.0, 1.8);
        let mut world = WorldState::new(car(0.0, 0.0, 0.0, 3.0), vec![npc]).unwrap();
        while !world.is_terminated() {
            world = step_world(&world, steering, accel, &p).unwrap();
        }
        prop_assert_eq!(world.events.len(), 1);
        let frozen = world.clone();
        prop_assert!(step_world(&world, 0.0, 0.0, &p).is_err());
        prop_assert_eq!(world, frozen);
    }
}

#[test]
fn head_on_contact_is_attributed_to_the_oncoming_vehicle() {
    let p = params();
    let npc = Npc::on_lane(2, &p.road, Lane::Opposite, 30.0, 3.0, 4.0, 1.8);
    let mut world = WorldState::new(car(0.0, 3.0, 0.0, 3.0), vec![npc]).unwrap();
    while !world.is_terminated() {
        world = step_world(&world, 0.0, 0.0, &p).unwrap();
    }
    assert_eq!(world.terminal_event().unwrap().kind, EventKind::Collision { npc_id: 2 });
}
