//! Deterministic random generators for tests and benchmarks: small balanced
//! instances sized for the exhaustive oracle, structurally valid candidate
//! plans, and targeted corruptions that the repair procedure must undo.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::Rng;

use crate::evaluation::Solution;
use crate::model::{Instance, Node, NodeId, VehicleSpec};

/// Builds a random balanced instance with `pairs` disjoint supplier/client
/// pairs and `vehicles` identical vehicles.
///
/// Coordinates are distinct grid points, every window is wide open, unit
/// cost and unit speed apply, and capacity covers the whole supply at once,
/// so one visit per node always suffices and the exhaustive search is exact.
pub fn random_instance(rng: &mut impl Rng, pairs: usize, vehicles: usize) -> Instance {
    assert!((1..=3).contains(&pairs), "pairs must lie in 1..=3");
    assert!(vehicles >= 1, "at least one vehicle");
    fn spot(rng: &mut impl Rng, taken: &mut BTreeSet<(i32, i32)>) -> (i32, i32) {
        loop {
            let xy = (rng.gen_range(1..=60), rng.gen_range(1..=60));
            if taken.insert(xy) {
                return xy;
            }
        }
    }
    let mut taken: BTreeSet<(i32, i32)> = BTreeSet::new();
    taken.insert((0, 0));

    let mut nodes = Vec::with_capacity(1 + 2 * pairs);
    nodes.push(Node {
        id: NodeId::DEPOT,
        x: 0.0,
        y: 0.0,
        q: 0.0,
        e: 0.0,
        l: 10_000.0,
        s: 0.0,
        succ: Vec::new(),
        pred: Vec::new(),
    });
    let mut supply = 0.0;
    for p in 0..pairs {
        let supplier = NodeId(1 + 2 * p as u32);
        let client = NodeId(2 + 2 * p as u32);
        let quantity = rng.gen_range(5..=40) as f64;
        supply += quantity;
        let (sx, sy) = spot(rng, &mut taken);
        let (cx, cy) = spot(rng, &mut taken);
        nodes.push(Node {
            id: supplier,
            x: sx as f64,
            y: sy as f64,
            q: quantity,
            e: 0.0,
            l: 10_000.0,
            s: rng.gen_range(0..=5) as f64,
            succ: alloc::vec![client],
            pred: Vec::new(),
        });
        nodes.push(Node {
            id: client,
            x: cx as f64,
            y: cy as f64,
            q: -quantity,
            e: 0.0,
            l: 10_000.0,
            s: rng.gen_range(0..=5) as f64,
            succ: Vec::new(),
            pred: alloc::vec![supplier],
        });
    }
    let fleet = (1..=vehicles as u32)
        .map(|id| VehicleSpec {
            id: crate::model::VehicleId(id),
            capacity: supply,
            unit_cost: 1.0,
            speed: 1.0,
        })
        .collect();
    Instance::new(nodes, fleet, BTreeMap::new()).expect("generated instance is valid")
}

/// A structurally valid plan serving each nonzero node exactly once, in
/// random order on random vehicles. Usually breaks precedence or coverage;
/// meant as raw material for repair.
pub fn random_solution(instance: &Instance, rng: &mut impl Rng) -> Solution {
    let mut solution = Solution::empty(instance);
    let fleet = solution.routes.len();
    let mut ids: Vec<NodeId> = instance
        .nodes()
        .iter()
        .filter(|n| n.q != 0.0)
        .map(|n| n.id)
        .collect();
    for i in (1..ids.len()).rev() {
        ids.swap(i, rng.gen_range(0..=i));
    }
    for id in ids {
        let r = rng.gen_range(0..fleet);
        solution.routes[r].1.push(id);
    }
    solution
}

/// Ways to damage a plan while keeping it structurally valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Corruption {
    /// Delete one visit, leaving its quantity outstanding.
    DropVisit,
    /// Repeat one visit elsewhere in its route.
    DuplicateVisit,
    /// Swap two visits, possibly across routes.
    SwapVisits,
    /// Move a client's visit to the front of the first route, ahead of its
    /// supplier.
    ClientFirst,
}

/// All corruption kinds, for sweeping tests.
pub const CORRUPTIONS: [Corruption; 4] = [
    Corruption::DropVisit,
    Corruption::DuplicateVisit,
    Corruption::SwapVisits,
    Corruption::ClientFirst,
];

/// Applies `kind` to a copy of `solution`; returns the copy unchanged when
/// the plan has too few visits for that corruption.
pub fn corrupt(
    instance: &Instance,
    solution: &Solution,
    kind: Corruption,
    rng: &mut impl Rng,
) -> Solution {
    let mut out = solution.clone();
    let positions: Vec<(usize, usize)> = out
        .routes
        .iter()
        .enumerate()
        .flat_map(|(r, (_, seq))| (0..seq.len()).map(move |p| (r, p)))
        .collect();
    if positions.is_empty() {
        return out;
    }
    match kind {
        Corruption::DropVisit => {
            let (r, p) = positions[rng.gen_range(0..positions.len())];
            out.routes[r].1.remove(p);
        }
        Corruption::DuplicateVisit => {
            let (r, p) = positions[rng.gen_range(0..positions.len())];
            let node = out.routes[r].1[p];
            let at = rng.gen_range(0..=out.routes[r].1.len());
            out.routes[r].1.insert(at, node);
        }
        Corruption::SwapVisits => {
            if positions.len() < 2 {
                return out;
            }
            let i = rng.gen_range(0..positions.len());
            let mut j = rng.gen_range(0..positions.len() - 1);
            if j >= i {
                j += 1;
            }
            let (ra, pa) = positions[i];
            let (rb, pb) = positions[j];
            let a = out.routes[ra].1[pa];
            let b = out.routes[rb].1[pb];
            out.routes[ra].1[pa] = b;
            out.routes[rb].1[pb] = a;
        }
        Corruption::ClientFirst => {
            let clients: Vec<(usize, usize)> = positions
                .iter()
                .copied()
                .filter(|&(r, p)| {
                    let id = out.routes[r].1[p];
                    instance.node(id).map_or(false, |n| n.q < 0.0)
                })
                .collect();
            let Some(&(r, p)) = clients
                .get(rng.gen_range(0..clients.len().max(1)))
                .or(clients.first())
            else {
                return out;
            };
            let node = out.routes[r].1.remove(p);
            out.routes[0].1.insert(0, node);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_balanced_and_roomy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for pairs in 1..=3 {
            let inst = random_instance(&mut rng, pairs, 2);
            assert_eq!(inst.total_supply(), inst.total_demand());
            assert_eq!(inst.nodes().len(), 1 + 2 * pairs);
            for v in inst.vehicles() {
                assert!(v.capacity >= inst.total_supply());
            }
            assert_eq!(inst.derive_precedence_pairs().unwrap().len(), pairs);
        }
    }

    #[test]
    fn corruptions_change_or_preserve_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let inst = random_instance(&mut rng, 3, 2);
        let base = random_solution(&inst, &mut rng);
        let total: usize = base.routes.iter().map(|(_, s)| s.len()).sum();
        assert_eq!(total, 6);
        for kind in CORRUPTIONS {
            let damaged = corrupt(&inst, &base, kind, &mut rng);
            assert!(damaged.check(&inst).is_ok());
            let damaged_total: usize =
                damaged.routes.iter().map(|(_, s)| s.len()).sum();
            match kind {
                Corruption::DropVisit => assert_eq!(damaged_total, total - 1),
                Corruption::DuplicateVisit => assert_eq!(damaged_total, total + 1),
                _ => assert_eq!(damaged_total, total),
            }
        }
    }
}
