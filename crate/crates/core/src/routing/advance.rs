use super::{manhattan_km, Point, RoutePlan, StopKind};

/// Stop reached while advancing a vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteEvent {
    pub kind: StopKind,
    pub order_id: u64,
    pub time: f64,
    pub loc: Point,
}

/// Move a vehicle along its route for `dt` seconds starting at `t_now`.
///
/// Stops with ETA ≤ t_now + dt are consumed in order and reported as events
/// at their exact ETA. The final position lies on the axis-aligned path
/// (x before y) toward the next remaining stop. Idle vehicles stay put.
pub fn advance_route(
    pos: &mut Point,
    route: &mut RoutePlan,
    t_now: f64,
    dt: f64,
    speed_kmh: f64,
) -> Vec<RouteEvent> {
    let t_end = t_now + dt;
    let mut events = Vec::new();
    let mut reached = 0;
    for stop in &route.stops {
        if stop.eta <= t_end {
            events.push(RouteEvent {
                kind: stop.kind,
                order_id: stop.order_id,
                time: stop.eta.max(t_now),
                loc: stop.loc,
            });
            *pos = stop.loc;
            reached += 1;
        } else {
            break;
        }
    }
    route.stops.drain(..reached);

    if let Some(next) = route.stops.first() {
        // Partial leg: walk x-then-y toward the next stop for the leftover time.
        let depart_t = events.last().map_or(t_now, |e| e.time);
        let budget_km = (t_end - depart_t).max(0.0) / 3600.0 * speed_kmh;
        let dist = manhattan_km(*pos, next.loc);
        if budget_km < dist {
            let mut remaining = budget_km;
            let dx = next.loc.x - pos.x;
            let step_x = remaining.min(dx.abs());
            pos.x += step_x * dx.signum();
            remaining -= step_x;
            if remaining > 0.0 {
                let dy = next.loc.y - pos.y;
                pos.y += remaining.min(dy.abs()) * dy.signum();
            }
        } else {
            // ETA dust: the stop is within reach but its ETA is just past
            // t_end. Park at the stop; the event fires next step.
            *pos = next.loc;
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::Stop;

    fn stop(kind: StopKind, order_id: u64, loc: Point, eta: f64) -> Stop {
        Stop {
            kind,
            order_id,
            loc,
            eta,
            deadline: None,
        }
    }

    #[test]
    fn idle_vehicle_stays_put() {
        let mut pos = Point::new(2.0, 3.0);
        let mut route = RoutePlan::empty();
        let events = advance_route(&mut pos, &mut route, 0.0, 60.0, 60.0);
        assert!(events.is_empty());
        assert_eq!(pos, Point::new(2.0, 3.0));
    }

    #[test]
    fn stop_exactly_dt_away_fires_at_boundary() {
        let mut pos = Point::new(0.0, 0.0);
        let mut route = RoutePlan {
            stops: vec![stop(StopKind::Pickup, 1, Point::new(1.0, 0.0), 60.0)],
        };
        let events = advance_route(&mut pos, &mut route, 0.0, 60.0, 60.0);
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].time, 60.0);
        assert!(route.is_empty());
        assert_eq!(pos, Point::new(1.0, 0.0));
    }

    #[test]
    fn two_stops_in_one_step_fire_in_order() {
        let mut pos = Point::new(0.0, 0.0);
        let mut route = RoutePlan {
            stops: vec![
                stop(StopKind::Pickup, 1, Point::new(1.0 / 3.0, 0.0), 20.0),
                stop(StopKind::Dropoff, 2, Point::new(1.0 / 3.0, 0.5), 50.0),
            ],
        };
        let events = advance_route(&mut pos, &mut route, 0.0, 60.0, 60.0);
        assert_eq!(events.len(), 2);
        assert!((events[0].time - 20.0).abs() < 1e-9);
        assert!((events[1].time - 50.0).abs() < 1e-9);
        assert_eq!(events[0].order_id, 1);
        assert_eq!(events[1].order_id, 2);
    }

    #[test]
    fn partial_leg_moves_x_before_y() {
        let mut pos = Point::new(0.0, 0.0);
        // Stop 2 km away (1 east, 1 north), 120 s at 60 km/h.
        let mut route = RoutePlan {
            stops: vec![stop(StopKind::Pickup, 1, Point::new(1.0, 1.0), 120.0)],
        };
        let events = advance_route(&mut pos, &mut route, 0.0, 90.0, 60.0);
        assert!(events.is_empty());
        // 1.5 km travelled: all of x, half of y.
        assert!((pos.x - 1.0).abs() < 1e-12);
        assert!((pos.y - 0.5).abs() < 1e-12);
    }
}
