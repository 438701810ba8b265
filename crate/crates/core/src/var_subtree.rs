//! Per-group variable subtree encoding: high-frequency filtering, stability
//! reordering, cnt-annotated subtree construction, pruning, stable-endpoint
//! assignment and per-line encoding.
//!
//! Endpoint IDs are assigned densely per group, relative to a group base the
//! coordinator allocates afterwards in group order, which keeps the numbering
//! independent of scheduling.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::token::VarList;
use crate::wire::{Reader, Writer};

/// Frequency profile of one variable position after filtering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionStats {
    pub position: usize,
    /// Sum of occurrences of all surviving values.
    pub total_frequency: u64,
    /// Number of surviving distinct values.
    pub discriminative_power: u64,
}

/// Per-position surviving value counts; `None` marks a position whose values
/// were all filtered out, excluding it from analysis entirely.
pub type SurvivingValues = Vec<Option<HashMap<Vec<u8>, u64>>>;

/// Drop values occurring fewer than `tau` times at their position.
/// Counting hashes borrowed slices; only the surviving distinct values are
/// copied out.
pub fn filter_frequencies(lines: &[(u64, VarList)], arity: usize, tau: u64) -> SurvivingValues {
    let mut counts: Vec<HashMap<&[u8], u64>> = vec![HashMap::new(); arity];
    for (_, vars) in lines {
        debug_assert_eq!(vars.len(), arity);
        for (pos, value) in vars.iter().enumerate() {
            *counts[pos].entry(value.as_slice()).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .map(|m| {
            let surviving: HashMap<Vec<u8>, u64> = m
                .into_iter()
                .filter(|&(_, c)| c >= tau)
                .map(|(v, c)| (v.to_vec(), c))
                .collect();
            if surviving.is_empty() {
                None
            } else {
                Some(surviving)
            }
        })
        .collect()
}

pub fn position_stats(surviving: &SurvivingValues) -> Vec<PositionStats> {
    surviving
        .iter()
        .enumerate()
        .filter_map(|(position, values)| {
            values.as_ref().map(|m| PositionStats {
                position,
                total_frequency: m.values().sum(),
                discriminative_power: m.len() as u64,
            })
        })
        .collect()
}

/// Deterministic insertion order: total frequency descending, then
/// discriminative power ascending, then original position ascending.
pub fn reorder_positions(stats: &[PositionStats]) -> Vec<usize> {
    let mut order: Vec<&PositionStats> = stats.iter().collect();
    order.sort_by(|a, b| {
        b.total_frequency
            .cmp(&a.total_frequency)
            .then(a.discriminative_power.cmp(&b.discriminative_power))
            .then(a.position.cmp(&b.position))
    });
    order.iter().map(|s| s.position).collect()
}

#[derive(Debug)]
pub struct VarNode {
    pub value: Vec<u8>,
    pub cnt: u64,
    /// Children keyed by the interned value ID of their position.
    children: HashMap<u32, usize>,
    /// Group-relative endpoint ID.
    pub endpoint: Option<u64>,
}

/// Per-position interner mapping each surviving value to a dense ID, so the
/// per-line tree walks hash one small integer instead of raw bytes.
struct ValueIds<'a>(Vec<Option<HashMap<&'a [u8], u32>>>);

impl<'a> ValueIds<'a> {
    fn build(surviving: &'a SurvivingValues) -> Self {
        ValueIds(
            surviving
                .iter()
                .map(|m| {
                    m.as_ref().map(|values| {
                        let mut keys: Vec<&[u8]> = values.keys().map(Vec::as_slice).collect();
                        keys.sort_unstable();
                        keys.into_iter()
                            .enumerate()
                            .map(|(i, v)| (v, i as u32))
                            .collect()
                    })
                })
                .collect(),
        )
    }

    /// The dense ID of `value` at `pos`, or `None` if it was filtered.
    fn get(&self, pos: usize, value: &[u8]) -> Option<u32> {
        self.0[pos].as_ref()?.get(value).copied()
    }
}

#[derive(Debug)]
pub struct VarSubtree {
    /// Arena; index 0 is a virtual root with an empty value.
    nodes: Vec<VarNode>,
}

const VROOT: usize = 0;

impl VarSubtree {
    fn new() -> Self {
        Self {
            nodes: vec![VarNode {
                value: Vec::new(),
                cnt: 0,
                children: HashMap::new(),
                endpoint: None,
            }],
        }
    }

    pub fn node(&self, id: usize) -> &VarNode {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.live_preorder().len()
    }

    fn sorted_children(&self, id: usize) -> Vec<usize> {
        let mut kids: Vec<usize> = self.nodes[id].children.values().copied().collect();
        kids.sort_by(|&a, &b| self.nodes[a].value.cmp(&self.nodes[b].value));
        kids
    }

    fn live_preorder(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![VROOT];
        while let Some(id) = stack.pop() {
            if id != VROOT {
                out.push(id);
            }
            let kids = self.sorted_children(id);
            for &c in kids.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Walk a line's reordered surviving values, extending the tree and
    /// incrementing cnt along the way; the walk stops at the first value
    /// that did not survive filtering.
    fn insert_line(&mut self, vars: &VarList, order: &[usize], ids: &ValueIds) {
        let mut cur = VROOT;
        for &pos in order {
            let value = &vars[pos];
            let Some(vid) = ids.get(pos, value) else {
                break;
            };
            cur = match self.nodes[cur].children.get(&vid) {
                Some(&c) => c,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(VarNode {
                        value: value.clone(),
                        cnt: 0,
                        children: HashMap::new(),
                        endpoint: None,
                    });
                    self.nodes[cur].children.insert(vid, id);
                    id
                }
            };
            self.nodes[cur].cnt += 1;
        }
    }

    /// Remove every node whose cnt fell below `tau`, with its descendants.
    pub fn prune(&mut self, tau: u64) {
        let mut stack = vec![VROOT];
        while let Some(id) = stack.pop() {
            let doomed: Vec<u32> = self.nodes[id]
                .children
                .iter()
                .filter(|(_, &c)| self.nodes[c].cnt < tau)
                .map(|(&v, _)| v)
                .collect();
            for v in doomed {
                self.nodes[id].children.remove(&v);
            }
            stack.extend(self.nodes[id].children.values().copied());
        }
    }

    /// Mark stable endpoints and assign dense group-relative IDs in
    /// pre-order with children in value order. Leaves always qualify; an
    /// interior node qualifies when its residual count (cnt minus the sum
    /// of its children's cnt) reaches `tau_endpoint`. Returns the number of
    /// endpoints assigned.
    pub fn assign_endpoints(&mut self, tau_endpoint: u64) -> u64 {
        let order = self.live_preorder();
        let mut next = 0u64;
        for id in order {
            let node = &self.nodes[id];
            let child_sum: u64 = node.children.values().map(|&c| self.nodes[c].cnt).sum();
            let qualifies = node.children.is_empty() || node.cnt - child_sum >= tau_endpoint;
            if qualifies {
                self.nodes[id].endpoint = Some(next);
                next += 1;
            }
        }
        next
    }

    /// Encode one line: walk its reordered surviving values through the
    /// (pruned) tree and report the deepest endpoint passed, if any.
    fn encode_line(&self, vars: &VarList, order: &[usize], ids: &ValueIds) -> LineCode {
        let mut cur = VROOT;
        let mut best: Option<(u64, usize)> = None;
        for (depth, &pos) in order.iter().enumerate() {
            let Some(vid) = ids.get(pos, &vars[pos]) else {
                break;
            };
            let Some(&child) = self.nodes[cur].children.get(&vid) else {
                break;
            };
            cur = child;
            if let Some(id) = self.nodes[cur].endpoint {
                best = Some((id, depth + 1));
            }
        }
        LineCode { endpoint: best }
    }
}

/// Per-line outcome of stage 2: either the deepest stable endpoint on the
/// line's matched path (with the covered depth), or nothing, in which case
/// the line keeps its structural pathID and all values become residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineCode {
    pub endpoint: Option<(u64, usize)>,
}

/// Stage-2 result for one structural group.
#[derive(Debug)]
pub struct GroupEncoding {
    pub order: Vec<usize>,
    pub subtree: Option<VarSubtree>,
    pub endpoint_count: u64,
    /// Aligned with the group's (lid-sorted) line list.
    pub line_codes: Vec<LineCode>,
    surviving: SurvivingValues,
}

impl GroupEncoding {
    /// Positions not covered for a line with the given covered depth, in
    /// ascending original order. Shared by the encoder and decoder.
    pub fn residual_positions(order: &[usize], covered: usize, arity: usize) -> Vec<usize> {
        let mut covered_mask = vec![false; arity];
        for &pos in &order[..covered] {
            covered_mask[pos] = true;
        }
        (0..arity).filter(|&p| !covered_mask[p]).collect()
    }

    pub fn surviving(&self) -> &SurvivingValues {
        &self.surviving
    }
}

/// Run the full stage-2 pipeline for one group.
pub fn analyze_group(
    lines: &[(u64, VarList)],
    arity: usize,
    tau_filter: u64,
    tau_prune: u64,
    tau_endpoint: u64,
) -> GroupEncoding {
    analyze_group_with_order(lines, arity, tau_filter, tau_prune, tau_endpoint, None)
}

/// Like [`analyze_group`], but with an externally supplied insertion order
/// (a subset of positions, in any permutation). Losslessness never depends
/// on the order heuristic; a bad order only costs compactness.
pub fn analyze_group_with_order(
    lines: &[(u64, VarList)],
    arity: usize,
    tau_filter: u64,
    tau_prune: u64,
    tau_endpoint: u64,
    forced_order: Option<Vec<usize>>,
) -> GroupEncoding {
    let none = GroupEncoding {
        order: Vec::new(),
        subtree: None,
        endpoint_count: 0,
        line_codes: vec![LineCode { endpoint: None }; lines.len()],
        surviving: Vec::new(),
    };
    if arity == 0 || lines.is_empty() {
        return none;
    }
    let surviving = filter_frequencies(lines, arity, tau_filter);
    let stats = position_stats(&surviving);
    if stats.is_empty() {
        // Every position was filtered out; the group skips stage 2.
        return GroupEncoding { surviving, ..none };
    }
    let order = forced_order.unwrap_or_else(|| reorder_positions(&stats));
    let ids = ValueIds::build(&surviving);
    let mut subtree = VarSubtree::new();
    for (_, vars) in lines {
        subtree.insert_line(vars, &order, &ids);
    }
    subtree.prune(tau_prune);
    let endpoint_count = subtree.assign_endpoints(tau_endpoint);
    let line_codes = lines
        .iter()
        .map(|(_, vars)| subtree.encode_line(vars, &order, &ids))
        .collect();
    GroupEncoding {
        order,
        subtree: Some(subtree),
        endpoint_count,
        line_codes,
        surviving,
    }
}

/// Serialize one group's stage-2 payload: permutation, per-position value
/// dictionaries, and the subtree in pre-order (value ref, endpoint flag and
/// dense relative ID; cnt is not stored).
pub fn serialize_group(enc: &GroupEncoding, out: &mut Writer) {
    let Some(subtree) = &enc.subtree else {
        out.byte(0);
        return;
    };
    out.byte(1);
    out.varint(enc.order.len() as u64);
    for &pos in &enc.order {
        out.varint(pos as u64);
    }
    // Per-depth dictionaries collected in pre-order first-use order.
    let preorder = subtree.live_preorder();
    let mut depth_of = vec![0usize; subtree.nodes.len()];
    {
        let mut stack: Vec<(usize, usize)> = vec![(VROOT, 0)];
        while let Some((id, d)) = stack.pop() {
            depth_of[id] = d;
            for &c in subtree.nodes[id].children.values() {
                stack.push((c, d + 1));
            }
        }
    }
    let mut dicts: Vec<Vec<&[u8]>> = vec![Vec::new(); enc.order.len()];
    let mut dict_index: Vec<HashMap<&[u8], usize>> = vec![HashMap::new(); enc.order.len()];
    for &id in &preorder {
        let d = depth_of[id] - 1;
        let value = subtree.nodes[id].value.as_slice();
        if !dict_index[d].contains_key(value) {
            let slot = dicts[d].len();
            dicts[d].push(value);
            dict_index[d].insert(value, slot);
        }
    }
    for dict in &dicts {
        out.varint(dict.len() as u64);
        for v in dict {
            out.blob(v);
        }
    }
    out.varint(preorder.len() as u64);
    out.varint(subtree.nodes[VROOT].children.len() as u64);
    for &id in &preorder {
        let node = &subtree.nodes[id];
        let d = depth_of[id] - 1;
        out.varint(dict_index[d][node.value.as_slice()] as u64);
        match node.endpoint {
            Some(rel) => {
                out.byte(1);
                out.varint(rel);
            }
            None => out.byte(0),
        }
        out.varint(node.children.len() as u64);
    }
}

/// Decoded stage-2 payload for one group: everything the decompressor needs
/// to resolve endpoint IDs back into positioned values.
#[derive(Debug)]
pub struct DecodedGroup {
    pub order: Vec<usize>,
    /// Relative endpoint ID -> value path (one value per covered depth).
    pub endpoints: Vec<DecodedEndpoint>,
}

#[derive(Debug)]
pub struct DecodedEndpoint {
    pub values: Vec<Vec<u8>>,
}

impl DecodedGroup {
    /// Parse one group; `None` when the group carries no subtree.
    pub fn parse(r: &mut Reader, arity: usize) -> Result<Option<Self>> {
        match r.byte()? {
            0 => return Ok(None),
            1 => {}
            b => return Err(Error::corrupt(format!("bad group flag {b}"))),
        }
        let norder = r.usize()?;
        if norder > arity {
            return Err(Error::corrupt(format!(
                "group permutation length {norder} exceeds arity {arity}"
            )));
        }
        let mut order = Vec::with_capacity(norder);
        let mut seen = vec![false; arity];
        for _ in 0..norder {
            let pos = r.usize()?;
            if pos >= arity || seen[pos] {
                return Err(Error::corrupt(format!("bad permutation entry {pos}")));
            }
            seen[pos] = true;
            order.push(pos);
        }
        let mut dicts: Vec<Vec<Vec<u8>>> = Vec::with_capacity(norder);
        for _ in 0..norder {
            let n = r.usize()?;
            let mut dict = Vec::with_capacity(n);
            for _ in 0..n {
                dict.push(r.blob()?);
            }
            dicts.push(dict);
        }
        let node_count = r.usize()?;
        let root_children = r.varint()?;
        let mut endpoints = Vec::new();
        // Walk the pre-order list keeping a (remaining children, value) stack.
        let mut stack: Vec<u64> = vec![root_children];
        let mut values: Vec<Vec<u8>> = Vec::new();
        for _ in 0..node_count {
            loop {
                match stack.last_mut() {
                    None => return Err(Error::corrupt("subtree node list too long")),
                    Some(0) => {
                        stack.pop();
                        values.pop();
                    }
                    Some(remaining) => {
                        *remaining -= 1;
                        break;
                    }
                }
            }
            let depth = values.len(); // depth of parent
            let dict = dicts
                .get(depth)
                .ok_or_else(|| Error::corrupt("subtree deeper than permutation"))?;
            let vref = r.usize()?;
            let value = dict
                .get(vref)
                .ok_or_else(|| Error::corrupt(format!("bad dictionary ref {vref}")))?
                .clone();
            values.push(value);
            match r.byte()? {
                0 => {}
                1 => {
                    let rel = r.varint()?;
                    if rel != endpoints.len() as u64 {
                        return Err(Error::corrupt(format!(
                            "non-dense endpoint ID {rel}, expected {}",
                            endpoints.len()
                        )));
                    }
                    endpoints.push(DecodedEndpoint {
                        values: values.clone(),
                    });
                }
                b => return Err(Error::corrupt(format!("bad endpoint flag {b}"))),
            }
            let children = r.varint()?;
            if children == 0 {
                values.pop();
            } else {
                stack.push(children);
            }
        }
        Ok(Some(Self { order, endpoints }))
    }
}
