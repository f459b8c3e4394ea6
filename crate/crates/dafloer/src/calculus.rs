//! Box tensor product, cancellation to a reduced model, and isomorphism
//! search for DA bimodules.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use smallvec::SmallVec;

use crate::algebra::Elem;
use crate::bimodule::{Action, BimoduleError, DABimodule, Inputs};

/// `m ⊠ n`: m's inputs are fed by chains of n's outputs.
pub fn box_tensor(m: &DABimodule, n: &DABimodule) -> Result<DABimodule, BimoduleError> {
    if m.right != n.left {
        return Err(BimoduleError::AlgebraMismatch(m.right.name().into(), n.left.name().into()));
    }
    let mut out = DABimodule::new(&format!("{}*{}", m.name, n.name), m.left.clone(), n.right.clone());
    let nm = n.num_generators();
    let mut pair = vec![u32::MAX; m.num_generators() * nm];
    for (xi, x) in m.generators().iter().enumerate() {
        for (yi, y) in n.generators().iter().enumerate() {
            if x.right == y.left {
                let grade = match (x.grade, y.grade) {
                    (Some(a), Some(b)) => Some((a + b) & 1),
                    _ => None,
                };
                pair[xi * nm + yi] =
                    out.add_generator(&format!("{}.{}", x.name, y.name), x.left, y.right, grade)?;
            }
        }
    }
    let id = |x: u32, y: u32| pair[x as usize * nm + y as usize];

    // n's actions with chord output, by (source, output).
    let mut feed: HashMap<(u32, Elem), Vec<&Action>> = HashMap::new();
    let mut by_left_idem: HashMap<Elem, Vec<u32>> = HashMap::new();
    for (yi, y) in n.generators().iter().enumerate() {
        by_left_idem.entry(y.left).or_default().push(yi as u32);
    }
    for a in n.actions() {
        if !n.left.is_idempotent(a.output) {
            feed.entry((a.source, a.output)).or_default().push(a);
        }
    }
    let mut memo: HashMap<(u32, Inputs), Vec<(Inputs, u32)>> = HashMap::new();
    for a in m.actions() {
        let xr = m.generator(a.source).right;
        let Some(ys) = by_left_idem.get(&xr) else { continue };
        for &y in ys {
            if a.inputs.is_empty() {
                out.toggle_unchecked(Action {
                    source: id(a.source, y),
                    inputs: SmallVec::new(),
                    output: a.output,
                    target: id(a.target, y),
                });
                continue;
            }
            let key = (y, a.inputs.clone());
            let chains = memo.entry(key).or_insert_with(|| chains_from(&feed, y, &a.inputs));
            for (ins, yk) in chains.iter() {
                out.toggle_unchecked(Action {
                    source: id(a.source, y),
                    inputs: ins.clone(),
                    output: a.output,
                    target: id(a.target, *yk),
                });
            }
        }
    }
    for b in n.actions() {
        if !n.left.is_idempotent(b.output) {
            continue;
        }
        for (xi, x) in m.generators().iter().enumerate() {
            if x.right == b.output {
                out.toggle_unchecked(Action {
                    source: id(xi as u32, b.source),
                    inputs: b.inputs.clone(),
                    output: x.left,
                    target: id(xi as u32, b.target),
                });
            }
        }
    }
    Ok(out)
}

/// All chains y ⊗ c̄₁ → b₁ ⊗ y₁, …, y_{k−1} ⊗ c̄_k → b_k ⊗ y_k, returned as
/// (c̄₁…c̄_k, y_k). Each step consumes one required output, so chains are
/// finite.
fn chains_from(feed: &HashMap<(u32, Elem), Vec<&Action>>, y: u32, outs: &[Elem]) -> Vec<(Inputs, u32)> {
    let mut res = Vec::new();
    let mut stack: Vec<(u32, usize, Inputs)> = vec![(y, 0, SmallVec::new())];
    while let Some((cur, i, ins)) = stack.pop() {
        if i == outs.len() {
            res.push((ins, cur));
            continue;
        }
        if let Some(acts) = feed.get(&(cur, outs[i])) {
            for a in acts {
                let mut next = ins.clone();
                next.extend_from_slice(&a.inputs);
                stack.push((a.target, i + 1, next));
            }
        }
    }
    res
}

/// Order in which cancellation candidates are scanned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CancelOrder {
    NameAscending,
    NameDescending,
}

pub fn reduce(m: &DABimodule) -> DABimodule {
    reduce_with(m, CancelOrder::NameAscending)
}

/// Gaussian elimination of unit differentials. A pair (x, y) is cancelled
/// when x ⊗ () → 1 ⊗ y is the only action from x to y; every zig-zag
/// w → y ⇢ x → z is replaced by its composite.
pub fn reduce_with(m: &DABimodule, order: CancelOrder) -> DABimodule {
    let n = m.num_generators();
    let mut out_adj: Vec<HashSet<Action>> = vec![HashSet::new(); n];
    let mut in_adj: Vec<HashSet<Action>> = vec![HashSet::new(); n];
    for a in m.actions() {
        out_adj[a.source as usize].insert(a.clone());
        in_adj[a.target as usize].insert(a.clone());
    }
    let mut alive = vec![true; n];
    let mut scan = m.sorted_ids();
    if order == CancelOrder::NameDescending {
        scan.reverse();
    }
    let left = &m.left;
    let toggle = |out_adj: &mut Vec<HashSet<Action>>, in_adj: &mut Vec<HashSet<Action>>, a: Action| {
        if !out_adj[a.source as usize].remove(&a) {
            in_adj[a.target as usize].insert(a.clone());
            out_adj[a.source as usize].insert(a);
        } else {
            in_adj[a.target as usize].remove(&a);
        }
    };
    let mut rank: Vec<usize> = vec![0; n];
    for (i, &g) in scan.iter().enumerate() {
        rank[g as usize] = i;
    }
    'outer: loop {
        for &x in &scan {
            if !alive[x as usize] {
                continue;
            }
            let mut best: Option<u32> = None;
            for a in &out_adj[x as usize] {
                if a.inputs.is_empty() && a.target != x && left.is_idempotent(a.output) {
                    let y = a.target;
                    let unique = out_adj[x as usize].iter().filter(|b| b.target == y).count() == 1;
                    if unique && best.is_none_or(|b| rank[y as usize] < rank[b as usize]) {
                        best = Some(y);
                    }
                }
            }
            if let Some(y) = best {
                cancel(&mut out_adj, &mut in_adj, left, x, y, &toggle);
                alive[x as usize] = false;
                alive[y as usize] = false;
                continue 'outer;
            }
        }
        break;
    }
    let keep: Vec<u32> = (0..n as u32).filter(|&g| alive[g as usize]).collect();
    let mut pruned = m.restrict(&[]);
    for &k in &keep {
        let g = m.generator(k);
        pruned.add_generator(&g.name, g.left, g.right, g.grade).unwrap();
    }
    let mut map = vec![u32::MAX; n];
    for (i, &k) in keep.iter().enumerate() {
        map[k as usize] = i as u32;
    }
    let mut acts: Vec<Action> = Vec::new();
    for &k in &keep {
        for a in &out_adj[k as usize] {
            acts.push(Action {
                source: map[a.source as usize],
                inputs: a.inputs.clone(),
                output: a.output,
                target: map[a.target as usize],
            });
        }
    }
    for a in acts {
        pruned.toggle_unchecked(a);
    }
    pruned
}

fn cancel<F>(
    out_adj: &mut Vec<HashSet<Action>>,
    in_adj: &mut Vec<HashSet<Action>>,
    left: &crate::algebra::Algebra,
    x: u32,
    y: u32,
    toggle: &F,
) where
    F: Fn(&mut Vec<HashSet<Action>>, &mut Vec<HashSet<Action>>, Action),
{
    let into_y: Vec<Action> =
        in_adj[y as usize].iter().filter(|a| a.source != x && a.source != y).cloned().collect();
    let from_x: Vec<Action> =
        out_adj[x as usize].iter().filter(|a| a.target != x && a.target != y).cloned().collect();
    let mut new_acts = Vec::new();
    for p in &into_y {
        for q in &from_x {
            if let Some(pq) = left.mul(p.output, q.output) {
                let mut ins = p.inputs.clone();
                ins.extend_from_slice(&q.inputs);
                new_acts.push(Action { source: p.source, inputs: ins, output: pq, target: q.target });
            }
        }
    }
    for g in [x, y] {
        let outs: Vec<Action> = out_adj[g as usize].drain().collect();
        for a in outs {
            in_adj[a.target as usize].remove(&a);
        }
        let ins: Vec<Action> = in_adj[g as usize].drain().collect();
        for a in ins {
            out_adj[a.source as usize].remove(&a);
        }
    }
    for a in new_acts {
        toggle(out_adj, in_adj, a);
    }
}

type Label = (Inputs, Elem);

/// Searches for a generator bijection carrying one action set exactly onto
/// the other. Returns pairs of generator names. When both sides are fully
/// graded the bijection must preserve grades up to one overall shift.
pub fn is_isomorphic(m: &DABimodule, n: &DABimodule) -> Result<Option<Vec<(String, String)>>, BimoduleError> {
    let graded = |d: &DABimodule| d.generators().iter().all(|g| g.grade.is_some());
    let shifts: &[Option<u8>] = if graded(m) && graded(n) { &[Some(0), Some(1)] } else { &[None] };
    for &shift in shifts {
        if let Some(w) = isomorphism_with_shift(m, n, shift)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

fn isomorphism_with_shift(
    m: &DABimodule,
    n: &DABimodule,
    shift: Option<u8>,
) -> Result<Option<Vec<(String, String)>>, BimoduleError> {
    if m.left != n.left {
        return Err(BimoduleError::AlgebraMismatch(m.left.name().into(), n.left.name().into()));
    }
    if m.right != n.right {
        return Err(BimoduleError::AlgebraMismatch(m.right.name().into(), n.right.name().into()));
    }
    if m.num_generators() != n.num_generators() || m.num_actions() != n.num_actions() {
        return Ok(None);
    }
    let size = m.num_generators();
    let (cm, cn) = refine_colors(m, n, shift);
    let mut hist_m: BTreeMap<u64, usize> = BTreeMap::new();
    let mut hist_n: BTreeMap<u64, usize> = BTreeMap::new();
    for c in &cm {
        *hist_m.entry(*c).or_default() += 1;
    }
    for c in &cn {
        *hist_n.entry(*c).or_default() += 1;
    }
    if hist_m != hist_n {
        return Ok(None);
    }
    let em = edge_map(m);
    let en = edge_map(n);
    // Most constrained generators first.
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by_key(|&i| (hist_m[&cm[i]], i));
    let mut fwd = vec![usize::MAX; size];
    let mut used = vec![false; size];
    let mut cand: HashMap<u64, Vec<usize>> = HashMap::new();
    for (j, c) in cn.iter().enumerate() {
        cand.entry(*c).or_default().push(j);
    }
    let consistent = |fwd: &[usize], x: usize, fx: usize, mapped: &[usize]| -> bool {
        let same = |a: (usize, usize), b: (usize, usize)| labels(&em, a.0, a.1) == labels(&en, b.0, b.1);
        if !same((x, x), (fx, fx)) {
            return false;
        }
        mapped.iter().all(|&z| {
            let fz = fwd[z];
            same((x, z), (fx, fz)) && same((z, x), (fz, fx))
        })
    };
    let mut mapped: Vec<usize> = Vec::new();
    let mut cursor: Vec<usize> = vec![0; size];
    let mut depth = 0usize;
    while depth < size {
        let x = order[depth];
        let cands = &cand[&cm[x]];
        let mut advanced = false;
        while cursor[depth] < cands.len() {
            let fx = cands[cursor[depth]];
            cursor[depth] += 1;
            if !used[fx] && consistent(&fwd, x, fx, &mapped) {
                fwd[x] = fx;
                used[fx] = true;
                mapped.push(x);
                depth += 1;
                if depth < size {
                    cursor[depth] = 0;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            if depth == 0 {
                return Ok(None);
            }
            depth -= 1;
            let x = order[depth];
            used[fwd[x]] = false;
            fwd[x] = usize::MAX;
            mapped.pop();
        }
    }
    let mut witness: Vec<(String, String)> = (0..size)
        .map(|i| (m.generator(i as u32).name.clone(), n.generator(fwd[i] as u32).name.clone()))
        .collect();
    witness.sort();
    Ok(Some(witness))
}

fn labels(map: &HashMap<(usize, usize), Vec<Label>>, a: usize, b: usize) -> Option<&Vec<Label>> {
    map.get(&(a, b))
}

fn edge_map(m: &DABimodule) -> HashMap<(usize, usize), Vec<Label>> {
    let mut e: HashMap<(usize, usize), Vec<Label>> = HashMap::new();
    for a in m.actions() {
        e.entry((a.source as usize, a.target as usize)).or_default().push((a.inputs.clone(), a.output));
    }
    for v in e.values_mut() {
        v.sort();
    }
    e
}

/// Joint colour refinement of both bimodules by idempotents, grades (when
/// both sides carry them) and labelled in/out actions.
fn refine_colors(m: &DABimodule, n: &DABimodule, shift: Option<u8>) -> (Vec<u64>, Vec<u64>) {
    let init = |d: &DABimodule, s: u8| -> Vec<u64> {
        d.generators()
            .iter()
            .map(|g| {
                let mut h = DefaultHasher::new();
                let gr = shift.and(g.grade).map(|x| x ^ s);
                (g.left, g.right, gr).hash(&mut h);
                h.finish()
            })
            .collect()
    };
    fn step(d: &DABimodule, c: &[u64]) -> Vec<u64> {
        let mut outs: Vec<Vec<(&Inputs, Elem, u64)>> = vec![Vec::new(); c.len()];
        let mut ins: Vec<Vec<(&Inputs, Elem, u64)>> = vec![Vec::new(); c.len()];
        for a in d.actions() {
            outs[a.source as usize].push((&a.inputs, a.output, c[a.target as usize]));
            ins[a.target as usize].push((&a.inputs, a.output, c[a.source as usize]));
        }
        (0..c.len())
            .map(|i| {
                outs[i].sort();
                ins[i].sort();
                let mut h = DefaultHasher::new();
                (c[i], &outs[i], &ins[i]).hash(&mut h);
                h.finish()
            })
            .collect()
    }
    let classes = |a: &[u64], b: &[u64]| a.iter().chain(b).collect::<HashSet<_>>().len();
    let (mut cm, mut cn) = (init(m, 0), init(n, shift.unwrap_or(0)));
    let mut k = classes(&cm, &cn);
    loop {
        let (nm, nn) = (step(m, &cm), step(n, &cn));
        let k2 = classes(&nm, &nn);
        cm = nm;
        cn = nn;
        if k2 == k {
            break;
        }
        k = k2;
    }
    (cm, cn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::z2;
    use crate::bimodule::make_identity;

    #[test]
    fn toy_tensor() {
        let a = z2();
        let r1 = a.parse_elem("r1").unwrap();
        let mut m = DABimodule::new("m", a.clone(), a.clone());
        let x = m.add_generator("x", a.idempotent(0), a.idempotent(0), None).unwrap();
        let xp = m.add_generator("xp", a.idempotent(1), a.idempotent(1), None).unwrap();
        m.toggle_action(Action { source: x, inputs: SmallVec::from_slice(&[r1]), output: r1, target: xp }).unwrap();
        let mut n = DABimodule::new("n", a.clone(), a.clone());
        let y = n.add_generator("y", a.idempotent(0), a.idempotent(0), None).unwrap();
        let yp = n.add_generator("yp", a.idempotent(1), a.idempotent(0), None).unwrap();
        n.toggle_action(Action { source: y, inputs: SmallVec::new(), output: r1, target: yp }).unwrap();
        let t = box_tensor(&m, &n).unwrap();
        assert_eq!(t.num_generators(), 2);
        let acts: Vec<String> = t.actions().map(|a| t.fmt_action(a)).collect();
        assert_eq!(acts, vec!["x.y ⊗ () → r1 ⊗ xp.yp"]);
    }

    #[test]
    fn identity_absorbs_and_cancellation() {
        let a = z2();
        let i = make_identity(&a);
        let ii = reduce(&box_tensor(&i, &i).unwrap());
        assert!(is_isomorphic(&ii, &i).unwrap().is_some());
        let mut d = DABimodule::new("d", a.clone(), a.clone());
        let x = d.add_generator("x", a.idempotent(0), a.idempotent(0), None).unwrap();
        let y = d.add_generator("y", a.idempotent(0), a.idempotent(0), None).unwrap();
        d.toggle_action(Action { source: x, inputs: SmallVec::new(), output: a.idempotent(0), target: y }).unwrap();
        assert_eq!(reduce(&d).num_generators(), 0);
    }

    #[test]
    fn renamed_identity_is_isomorphic() {
        let a = z2();
        let i = make_identity(&a);
        let text = crate::seeddata::serialize_bimodule(&i)
            .replace("i0 |", "g0 |")
            .replace("| i0", "| g0")
            .replace("gen i0", "gen g0");
        let j = crate::seeddata::parse_bimodule(&text, &mut crate::seeddata::Registry::standard()).unwrap();
        assert!(j.gen_id("g0").is_some());
        assert!(is_isomorphic(&i, &j).unwrap().is_some());
    }
}
