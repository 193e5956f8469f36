//! Connectivity-error reference built on union-find labeling, structurally
//! unlike a flood-fill implementation.

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as the root so the root doubles as the
            // component's first pixel in row-major order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// 8-connected components of a boolean mask. Returns (labels, sizes) where
/// labels[i] is usize::MAX off the mask and otherwise the component's
/// smallest pixel index.
pub fn components(mask: &[bool], w: usize, h: usize) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut dsu = Dsu::new(w * h);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask[i] {
                continue;
            }
            // Union with already-visited neighbors: left, and the three above.
            if x > 0 && mask[i - 1] {
                dsu.union(i, i - 1);
            }
            if y > 0 {
                for dx in -1i64..=1 {
                    let nx = x as i64 + dx;
                    if (0..w as i64).contains(&nx) {
                        let j = (y - 1) * w + nx as usize;
                        if mask[j] {
                            dsu.union(i, j);
                        }
                    }
                }
            }
        }
    }
    let mut labels = vec![usize::MAX; w * h];
    let mut sizes: std::collections::BTreeMap<usize, usize> = Default::default();
    for i in 0..w * h {
        if mask[i] {
            let root = dsu.find(i);
            labels[i] = root;
            *sizes.entry(root).or_insert(0) += 1;
        }
    }
    (labels, sizes.into_iter().collect())
}

/// Root label of the largest component; ties go to the component whose first
/// pixel comes earliest in row-major order. None when the mask is empty.
pub fn largest_root(mask: &[bool], w: usize, h: usize) -> Option<usize> {
    let (_, sizes) = components(mask, w, h);
    // BTreeMap iteration is ascending by root (= first pixel), so strict
    // `>` keeps the earliest component on size ties.
    let mut best: Option<(usize, usize)> = None;
    for (root, size) in sizes {
        if best.map_or(true, |(_, bs)| size > bs) {
            best = Some((root, size));
        }
    }
    best.map(|(root, _)| root)
}

/// Connectivity error of a predicted alpha against ground truth.
pub fn ref_conn_error(
    pred: &[f32],
    gt: &[f32],
    w: usize,
    h: usize,
    step: f64,
    gate: f64,
) -> f64 {
    let n = w * h;
    // Round-down level map: largest theta at which the pixel still belongs to
    // the chosen source region. -1 marks "never seen"; survivors end at 1.
    let mut level = vec![-1.0f64; n];
    let mut omega = vec![false; n];
    let mut k = 1u32;
    loop {
        let theta = f64::from(k) * step;
        if theta >= 1.0 - step / 2.0 {
            break;
        }
        let mask: Vec<bool> = (0..n)
            .map(|i| f64::from(pred[i]) >= theta && f64::from(gt[i]) >= theta)
            .collect();
        let (labels, _) = components(&mask, w, h);
        let root = largest_root(&mask, w, h);
        for i in 0..n {
            let inside = root.is_some_and(|r| labels[i] == r);
            if inside {
                omega[i] = true;
            } else if omega[i] && level[i] < 0.0 {
                level[i] = f64::from(k - 1) * step;
            }
        }
        k += 1;
    }
    let mut sum = 0.0;
    for i in 0..n {
        let l = if !omega[i] {
            0.0
        } else if level[i] < 0.0 {
            1.0
        } else {
            level[i]
        };
        let phi = |v: f64| {
            let d = v - l;
            if d >= gate { 1.0 - d } else { 1.0 }
        };
        sum += (phi(f64::from(pred[i])) - phi(f64::from(gt[i]))).abs();
    }
    sum / 1000.0
}
