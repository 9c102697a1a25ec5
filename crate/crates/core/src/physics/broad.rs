use super::shape::Aabb;

/// Inflation applied to every AABB before the overlap test, in meters.
pub const BROADPHASE_MARGIN: f64 = 0.01;

/// Sweep-and-prune on the x axis. Returns every pair whose AABBs overlap
/// on all three axes, as `(smaller id, larger id)` in lexicographic order.
/// Inflate the boxes before calling.
pub fn sweep_and_prune<'a>(items: &[(&'a str, Aabb)]) -> Vec<(&'a str, &'a str)> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&i, &j| {
        items[i].1.min.x
            .total_cmp(&items[j].1.min.x)
            .then_with(|| items[i].0.cmp(items[j].0))
    });
    let mut active: Vec<usize> = Vec::new();
    let mut pairs = Vec::new();
    for &i in &order {
        let bi = &items[i].1;
        active.retain(|&j| items[j].1.max.x >= bi.min.x);
        for &j in &active {
            let bj = &items[j].1;
            if bi.min.y <= bj.max.y && bj.min.y <= bi.max.y && bi.min.z <= bj.max.z && bj.min.z <= bi.max.z {
                let (a, b) = (items[i].0, items[j].0);
                pairs.push(if a < b { (a, b) } else { (b, a) });
            }
        }
        active.push(i);
    }
    pairs.sort_unstable();
    pairs
}
