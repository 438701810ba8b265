//! The structural prefix tree: per-batch local trees, merge into a global
//! tree, isomorphic subtree merging, and dense pathID assignment.
//!
//! All traversals are iterative; input lines can be arbitrarily long and the
//! tree arbitrarily deep.

use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::token::{Token, VarList};
use crate::wire::{Reader, Writer};

pub type NodeId = usize;

/// Per-terminal aggregation of the lines ending at that node.
#[derive(Debug, Default, Clone)]
pub struct Record {
    pub lids: Vec<u64>,
    pub var_lists: Vec<VarList>,
}

impl Record {
    fn push(&mut self, lid: u64, vars: VarList) {
        self.lids.push(lid);
        self.var_lists.push(vars);
    }

    fn append(&mut self, other: &mut Record) {
        self.lids.append(&mut other.lids);
        self.var_lists.append(&mut other.var_lists);
    }

    pub fn len(&self) -> usize {
        self.lids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lids.is_empty()
    }
}

#[derive(Debug)]
pub struct StructNode {
    pub label: Token,
    children: HashMap<Token, NodeId>,
    pub record: Option<Record>,
}

impl StructNode {
    fn new(label: Token) -> Self {
        Self {
            label,
            children: HashMap::new(),
            record: None,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.record.is_some()
    }

    pub fn child_count(&self) -> usize {
        self.children.len()
    }
}

pub const ROOT: NodeId = 0;

#[derive(Debug)]
pub struct StructTree {
    nodes: Vec<StructNode>,
    line_count: u64,
}

/// One structural group produced by pathID assignment: a terminal node, the
/// root-to-terminal skeleton, and all lines that ended there.
#[derive(Debug)]
pub struct Group {
    pub path_id: u64,
    pub node: NodeId,
    pub skeleton: Vec<Token>,
    /// Number of wildcard tokens in the skeleton == length of every varList.
    pub arity: usize,
    /// (lid, varList) pairs, sorted by lid.
    pub lines: Vec<(u64, VarList)>,
}

impl Default for StructTree {
    fn default() -> Self {
        Self::new()
    }
}

impl StructTree {
    pub fn new() -> Self {
        // The root carries an empty sentinel label that insertables can
        // never produce (real tokens have at least one nonempty segment).
        Self {
            nodes: vec![StructNode::new(Token::Text(Vec::new()))],
            line_count: 0,
        }
    }

    pub fn node(&self, id: NodeId) -> &StructNode {
        &self.nodes[id]
    }

    pub fn node_count_reachable(&self) -> usize {
        self.preorder().len()
    }

    pub fn line_count(&self) -> u64 {
        self.line_count
    }

    fn child(&self, id: NodeId, label: &Token) -> Option<NodeId> {
        self.nodes[id].children.get(label).copied()
    }

    fn child_or_insert(&mut self, id: NodeId, label: &Token) -> NodeId {
        if let Some(c) = self.child(id, label) {
            return c;
        }
        let new_id = self.nodes.len();
        self.nodes.push(StructNode::new(label.clone()));
        self.nodes[id].children.insert(label.clone(), new_id);
        new_id
    }

    /// Children of `id` in canonical (token-encoding) order. This single
    /// ordering drives signatures, pathID assignment and serialization.
    pub fn sorted_children(&self, id: NodeId) -> Vec<NodeId> {
        let mut kids: Vec<NodeId> = self.nodes[id].children.values().copied().collect();
        kids.sort_by_cached_key(|&c| self.nodes[c].label.canonical_bytes());
        kids
    }

    /// Insert one line: the path labelled by its tokens ends at a terminal
    /// node whose record gains (lid, vars). A line that is a strict prefix
    /// of an existing path simply marks the interior node terminal.
    pub fn insert_line(&mut self, lid: u64, tokens: &[Token], vars: VarList) {
        let mut cur = ROOT;
        for token in tokens {
            cur = self.child_or_insert(cur, token);
        }
        self.nodes[cur]
            .record
            .get_or_insert_with(Record::default)
            .push(lid, vars);
        self.line_count += 1;
    }

    /// Find or create the child of `parent` with the given label. Together
    /// with [`StructTree::set_terminal`] this allows building arbitrary
    /// trees directly, e.g. for signature tooling.
    pub fn add_child(&mut self, parent: NodeId, label: Token) -> NodeId {
        self.child_or_insert(parent, &label)
    }

    /// Mark a node terminal (with an empty record if it had none).
    pub fn set_terminal(&mut self, node: NodeId) {
        self.nodes[node].record.get_or_insert_with(Record::default);
    }

    /// Merge another tree into this one: shared paths pool their records,
    /// differing structure adds new branches. Record order is not preserved;
    /// lids are re-sorted when groups are formed.
    pub fn merge(&mut self, mut other: StructTree) {
        let mut stack: Vec<(NodeId, NodeId)> = vec![(ROOT, ROOT)];
        while let Some((gid, oid)) = stack.pop() {
            if let Some(mut rec) = other.nodes[oid].record.take() {
                self.nodes[gid]
                    .record
                    .get_or_insert_with(Record::default)
                    .append(&mut rec);
            }
            let children = std::mem::take(&mut other.nodes[oid].children);
            for (label, ocid) in children {
                let gcid = self.child_or_insert(gid, &label);
                stack.push((gcid, ocid));
            }
        }
        self.line_count += other.line_count;
    }

    /// Nodes in canonical pre-order, starting at the root.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![ROOT];
        while let Some(id) = stack.pop() {
            out.push(id);
            let kids = self.sorted_children(id);
            for &c in kids.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Structural signature of the subtree rooted at `id`, label included.
    /// Two subtrees have equal signatures exactly when they are isomorphic
    /// as labelled rooted trees with matching terminal placement.
    pub fn structural_signature(&self, id: NodeId) -> Vec<u8> {
        let sigs = self.signatures_below(id);
        let mut out = Vec::new();
        write_label_prefix(&self.nodes[id].label, &mut out);
        out.extend_from_slice(&sigs[&id]);
        out
    }

    /// Bottom-up signature computation for the subtree rooted at `top`.
    /// The returned map holds each node's below-signature (terminal flag
    /// plus wrapped, sorted child signatures; own label excluded).
    fn signatures_below(&self, top: NodeId) -> HashMap<NodeId, Rc<Vec<u8>>> {
        let mut sigs: HashMap<NodeId, Rc<Vec<u8>>> = HashMap::new();
        let mut stack: Vec<(NodeId, bool)> = vec![(top, false)];
        while let Some((id, expanded)) = stack.pop() {
            if !expanded {
                stack.push((id, true));
                for &c in self.nodes[id].children.values() {
                    stack.push((c, false));
                }
            } else {
                let sig = self.assemble_below_sig(id, &sigs);
                sigs.insert(id, Rc::new(sig));
            }
        }
        sigs
    }

    fn assemble_below_sig(&self, id: NodeId, sigs: &HashMap<NodeId, Rc<Vec<u8>>>) -> Vec<u8> {
        let node = &self.nodes[id];
        let mut child_sigs: Vec<Vec<u8>> = node
            .children
            .iter()
            .map(|(label, &c)| {
                let mut full = Vec::new();
                write_label_prefix(label, &mut full);
                full.extend_from_slice(&sigs[&c]);
                full
            })
            .collect();
        child_sigs.sort_unstable();
        let mut sig = Vec::new();
        sig.push(if node.is_terminal() {
            SIG_TERMINAL
        } else {
            SIG_PLAIN
        });
        for cs in &child_sigs {
            sig.push(SIG_OPEN);
            sig.extend_from_slice(cs);
            sig.push(SIG_CLOSE);
        }
        sig
    }

    /// Bottom-up isomorphic subtree merging: wherever a sibling with a pure
    /// literal label leads into a subtree isomorphic to the `<*>` sibling's,
    /// the literal branch is folded into the wildcard branch and the literal
    /// becomes a variable value for all affected lines.
    ///
    /// Tokens still carrying metadata placeholders are never folded: their
    /// extracted values already sit in positional streams and cannot move
    /// into a variable list.
    pub fn merge_isomorphic(&mut self) -> Result<()> {
        // wilds[n] = number of wildcards on the path root..=n.
        let mut wilds: Vec<u64> = vec![0; self.nodes.len()];
        let mut sigs: HashMap<NodeId, Rc<Vec<u8>>> = HashMap::new();
        let mut stack: Vec<(NodeId, bool)> = vec![(ROOT, false)];
        while let Some((id, expanded)) = stack.pop() {
            if !expanded {
                stack.push((id, true));
                let here = wilds[id];
                for (label, &c) in &self.nodes[id].children {
                    wilds[c] = here + u64::from(label.is_wildcard());
                    stack.push((c, false));
                }
                continue;
            }
            // Children are fully processed; fold matching literal siblings
            // into the wildcard sibling, then freeze this node's signature.
            if self.nodes[id].children.len() >= 2 {
                if let Some(wild) = self.child(id, &Token::Wildcard) {
                    let wild_sig = sigs[&wild].clone();
                    let candidates: Vec<(Token, NodeId)> = self.nodes[id]
                        .children
                        .iter()
                        .filter(|(label, _)| label.pure_literal_bytes().is_some())
                        .map(|(label, &c)| (label.clone(), c))
                        .collect();
                    for (label, child) in candidates {
                        if *sigs[&child] == *wild_sig {
                            self.fold_branch(id, &label, child, wild, wilds[id])?;
                        }
                    }
                }
            }
            let sig = self.assemble_below_sig(id, &sigs);
            sigs.insert(id, Rc::new(sig));
        }
        Ok(())
    }

    /// Fold the literal branch `lit` into its wildcard sibling `wild` under
    /// `parent`. `insert_pos` is the number of wildcards above the merge
    /// point, i.e. the varList index where the literal value belongs.
    fn fold_branch(
        &mut self,
        parent: NodeId,
        label: &Token,
        lit: NodeId,
        wild: NodeId,
        insert_pos: u64,
    ) -> Result<()> {
        let bytes = label
            .pure_literal_bytes()
            .ok_or_else(|| Error::Internal("fold target is not a pure literal".into()))?
            .to_vec();
        // The folded label becomes a variable value for every line in the
        // literal subtree, spliced in at its original token position.
        let mut walk = vec![lit];
        while let Some(id) = walk.pop() {
            if let Some(rec) = self.nodes[id].record.as_mut() {
                for vars in &mut rec.var_lists {
                    vars.insert(insert_pos as usize, bytes.clone());
                }
            }
            walk.extend(self.nodes[id].children.values().copied());
        }
        // Merge records pairwise along the two isomorphic subtrees.
        let mut pairs = vec![(wild, lit)];
        while let Some((w, l)) = pairs.pop() {
            if let Some(mut rec) = self.nodes[l].record.take() {
                let wnode = &mut self.nodes[w];
                if wnode.record.is_none() {
                    return Err(Error::Internal(
                        "terminal placement mismatch during isomorphic merge".into(),
                    ));
                }
                wnode
                    .record
                    .get_or_insert_with(Record::default)
                    .append(&mut rec);
            }
            let children = std::mem::take(&mut self.nodes[l].children);
            for (clabel, lc) in children {
                let wc = self.child(w, &clabel).ok_or_else(|| {
                    Error::Internal("child mismatch during isomorphic merge".into())
                })?;
                pairs.push((wc, lc));
            }
        }
        self.nodes[parent].children.remove(label);
        Ok(())
    }

    /// Assign dense structural pathIDs to terminal nodes in canonical
    /// pre-order and flatten their records into per-group line lists.
    pub fn assign_path_ids(&mut self) -> Vec<Group> {
        let mut groups = Vec::new();
        // Pre-order walk carrying the label path; each visit truncates the
        // path back to its own depth before pushing its label.
        let mut path: Vec<Token> = Vec::new();
        let mut stack: Vec<(NodeId, usize)> = vec![(ROOT, 0)];
        while let Some((id, depth)) = stack.pop() {
            path.truncate(depth);
            if id != ROOT {
                path.push(self.nodes[id].label.clone());
            }
            if let Some(record) = self.nodes[id].record.take() {
                let skeleton = path.clone();
                let arity = skeleton.iter().filter(|t| t.is_wildcard()).count();
                let mut lines: Vec<(u64, VarList)> =
                    record.lids.into_iter().zip(record.var_lists).collect();
                lines.sort_unstable_by_key(|(lid, _)| *lid);
                // Keep the node marked terminal for serialization.
                self.nodes[id].record = Some(Record::default());
                groups.push(Group {
                    path_id: groups.len() as u64,
                    node: id,
                    skeleton,
                    arity,
                    lines,
                });
            }
            let kids = self.sorted_children(id);
            for &c in kids.iter().rev() {
                stack.push((c, path.len()));
            }
        }
        groups
    }

    /// Serialize the skeleton: canonical pre-order node list with label,
    /// terminal flag and child count, plus the dense pathID of each
    /// terminal.
    pub fn serialize_skeleton(&self, out: &mut Writer) {
        let order = self.preorder();
        out.varint(order.len() as u64);
        let mut next_id = 0u64;
        for &id in &order {
            let node = &self.nodes[id];
            if id != ROOT {
                out.token(&node.label);
            }
            out.byte(u8::from(node.is_terminal()));
            out.varint(node.children.len() as u64);
            if node.is_terminal() {
                out.varint(next_id);
                next_id += 1;
            }
        }
    }
}

const SIG_TERMINAL: u8 = b'T';
const SIG_PLAIN: u8 = b'.';
const SIG_OPEN: u8 = b'(';
const SIG_CLOSE: u8 = b')';

fn write_label_prefix(label: &Token, out: &mut Vec<u8>) {
    let bytes = label.canonical_bytes();
    crate::codec::varint_encode(bytes.len() as u64, out);
    out.extend_from_slice(&bytes);
}

/// The decoded skeleton: enough structure to reverse a structural pathID
/// into its token path.
#[derive(Debug)]
pub struct DecodedSkeleton {
    pub nodes: Vec<DecodedNode>,
    /// pathID -> node index.
    pub terminals: Vec<usize>,
}

#[derive(Debug)]
pub struct DecodedNode {
    pub label: Token,
    pub parent: Option<usize>,
    pub terminal: bool,
}

impl DecodedSkeleton {
    pub fn parse(r: &mut Reader) -> Result<Self> {
        let count = r.usize()?;
        if count == 0 {
            return Err(Error::corrupt("skeleton has no root"));
        }
        let mut nodes: Vec<DecodedNode> = Vec::with_capacity(count);
        let mut terminals = Vec::new();
        // Stack of (node index, remaining children to attach).
        let mut stack: Vec<(usize, u64)> = Vec::new();
        for i in 0..count {
            let parent = loop {
                match stack.last_mut() {
                    None if i == 0 => break None,
                    None => return Err(Error::corrupt("skeleton node list too long")),
                    Some((_, 0)) => {
                        stack.pop();
                    }
                    Some((p, remaining)) => {
                        *remaining -= 1;
                        break Some(*p);
                    }
                }
            };
            let label = if i == 0 {
                Token::Text(Vec::new())
            } else {
                r.token()?
            };
            let terminal = match r.byte()? {
                0 => false,
                1 => true,
                b => return Err(Error::corrupt(format!("bad terminal flag {b}"))),
            };
            let children = r.varint()?;
            if terminal {
                let id = r.varint()?;
                if id != terminals.len() as u64 {
                    return Err(Error::corrupt(format!(
                        "non-dense structural pathID {id}, expected {}",
                        terminals.len()
                    )));
                }
                terminals.push(i);
            }
            nodes.push(DecodedNode {
                label,
                parent,
                terminal,
            });
            if children > 0 {
                stack.push((i, children));
            }
        }
        while let Some((_, 0)) = stack.last() {
            stack.pop();
        }
        if !stack.is_empty() {
            return Err(Error::corrupt("skeleton ended with unattached children"));
        }
        Ok(Self { nodes, terminals })
    }

    /// Root-to-node token path for a structural pathID.
    pub fn skeleton_of(&self, path_id: u64) -> Result<Vec<Token>> {
        let &node = self
            .terminals
            .get(path_id as usize)
            .ok_or_else(|| Error::corrupt(format!("unknown structural pathID {path_id}")))?;
        let mut rev = Vec::new();
        let mut cur = Some(node);
        while let Some(id) = cur {
            if id != 0 {
                rev.push(self.nodes[id].label.clone());
            }
            cur = self.nodes[id].parent;
        }
        rev.reverse();
        Ok(rev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::PatternSet;
    use crate::preprocess::preprocess_line;

    fn tree_from_lines(lines: &[&[u8]]) -> StructTree {
        let patterns = PatternSet::default_set();
        let mut tree = StructTree::new();
        for (lid, line) in lines.iter().enumerate() {
            let pre = preprocess_line(line, &patterns);
            tree.insert_line(lid as u64, &pre.tokens, pre.vars);
        }
        tree
    }

    /// All root-to-terminal reconstructable lines (skeleton + varList),
    /// as a sorted multiset; the isomorphic merge must preserve this.
    fn reconstructable(tree: &StructTree) -> Vec<Vec<Vec<u8>>> {
        let mut out = Vec::new();
        let mut stack: Vec<(NodeId, Vec<Token>)> = vec![(ROOT, Vec::new())];
        while let Some((id, path)) = stack.pop() {
            if let Some(rec) = &tree.nodes[id].record {
                for vars in &rec.var_lists {
                    let mut line = Vec::new();
                    let mut vi = 0;
                    for t in &path {
                        match t {
                            Token::Wildcard => {
                                line.push(vars[vi].clone());
                                vi += 1;
                            }
                            t => match t.pure_literal_bytes() {
                                Some(b) => line.push(b.to_vec()),
                                None => line.push(t.canonical_bytes()),
                            },
                        }
                    }
                    out.push(line);
                }
            }
            for &c in tree.nodes[id].children.values() {
                let mut p = path.clone();
                p.push(tree.nodes[c].label.clone());
                stack.push((c, p));
            }
        }
        out.sort();
        out
    }

    #[test]
    fn identical_lines_share_one_path() {
        let tree = tree_from_lines(&[b"alpha beta uid=5", b"alpha beta uid=7"]);
        let mut tree = tree;
        let groups = tree.assign_path_ids();
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].lines.len(), 2);
        assert_eq!(groups[0].arity, 1);
    }

    #[test]
    fn prefix_line_marks_interior_terminal() {
        let mut tree = tree_from_lines(&[b"alpha beta gamma", b"alpha beta"]);
        let groups = tree.assign_path_ids();
        assert_eq!(groups.len(), 2);
        let sizes: Vec<usize> = groups.iter().map(|g| g.skeleton.len()).collect();
        assert!(sizes.contains(&2) && sizes.contains(&3));
    }

    #[test]
    fn merge_empty_is_identity() {
        let mut a = StructTree::new();
        let b = tree_from_lines(&[b"x y z", b"x y"]);
        let before = reconstructable(&b);
        a.merge(b);
        assert_eq!(reconstructable(&a), before);
    }

    #[test]
    fn merge_same_tree_doubles_records() {
        let a = tree_from_lines(&[b"x y uid=1", b"w v"]);
        let b = tree_from_lines(&[b"x y uid=1", b"w v"]);
        let mut merged = a;
        merged.merge(b);
        let mut groups = merged.assign_path_ids();
        groups.sort_by_key(|g| g.skeleton.len());
        assert_eq!(groups.len(), 2);
        assert!(groups.iter().all(|g| g.lines.len() == 2));
    }

    #[test]
    fn merge_path_sets_commute() {
        let lines_a: Vec<&[u8]> = vec![b"a b c", b"a b", b"q r s1"];
        let lines_b: Vec<&[u8]> = vec![b"a b d", b"zz", b"q r s2"];
        let mut ab = tree_from_lines(&lines_a);
        ab.merge(tree_from_lines(&lines_b));
        let mut ba = tree_from_lines(&lines_b);
        ba.merge(tree_from_lines(&lines_a));
        assert_eq!(reconstructable(&ab), reconstructable(&ba));
    }

    #[test]
    fn leaf_signature_is_terminal_marker_only() {
        let mut tree = StructTree::new();
        tree.insert_line(0, &[Token::literal(b"a".as_slice())], vec![]);
        let leaf = tree.child(ROOT, &Token::literal(b"a".as_slice())).unwrap();
        let sigs = tree.signatures_below(leaf);
        assert_eq!(*sigs[&leaf], vec![SIG_TERMINAL]);
    }

    #[test]
    fn isomorphic_merge_folds_literal_into_wildcard() {
        // Two sibling branches with isomorphic `<*>` tails; the literal one
        // must fold into the wildcard, its label joining each varList.
        let mut tree = tree_from_lines(&[
            b"failure; user=test1 uid=509 euid=0",
            b"failure; user=root uid=0 euid=0",
        ]);
        let before = reconstructable(&tree);
        tree.merge_isomorphic().unwrap();
        let after = reconstructable(&tree);
        assert_eq!(before, after, "merge must be lossless");
        let groups = tree.assign_path_ids();
        assert_eq!(groups.len(), 1, "branches should have merged");
        assert_eq!(groups[0].arity, 3);
        let root_kids = tree.sorted_children(ROOT);
        assert_eq!(root_kids.len(), 1);
    }

    #[test]
    fn no_wildcard_sibling_means_no_merge() {
        let mut tree = tree_from_lines(&[b"a user=root x", b"a user=admin x"]);
        tree.merge_isomorphic().unwrap();
        let groups = tree.assign_path_ids();
        assert_eq!(groups.len(), 2, "literal siblings must not merge");
    }

    #[test]
    fn differing_terminal_placement_blocks_merge() {
        // Identical shapes below `user=root` and `<*>`, but the wildcard
        // branch has an extra terminal at its interior `x` node. Terminal
        // placement is part of the signature, so nothing merges.
        let lines: Vec<&[u8]> = vec![b"a user=root x y", b"a uid=1 x y", b"a uid=2 x"];
        let mut tree = tree_from_lines(&lines);
        tree.merge_isomorphic().unwrap();
        assert_eq!(tree.assign_path_ids().len(), 3);
        // Control: with matching terminal placement the merge fires.
        let lines: Vec<&[u8]> = vec![
            b"a user=root x y",
            b"a user=root x",
            b"a uid=1 x y",
            b"a uid=2 x",
        ];
        let mut tree = tree_from_lines(&lines);
        tree.merge_isomorphic().unwrap();
        assert_eq!(tree.assign_path_ids().len(), 2);
    }

    #[test]
    fn isomorphic_merge_is_idempotent() {
        let lines: Vec<&[u8]> = vec![
            b"failure; user=test1 uid=509 euid=0",
            b"failure; user=root uid=0 euid=0",
            b"failure; user=root uid=0 euid=0",
            b"ok done",
        ];
        let mut once = tree_from_lines(&lines);
        once.merge_isomorphic().unwrap();
        let after_once = reconstructable(&once);
        let sig_once = once.structural_signature(ROOT);
        once.merge_isomorphic().unwrap();
        assert_eq!(reconstructable(&once), after_once);
        assert_eq!(once.structural_signature(ROOT), sig_once);
    }

    #[test]
    fn skeleton_serialization_roundtrips() {
        let mut tree = tree_from_lines(&[b"alpha beta uid=5", b"alpha beta", b"gamma", b""]);
        tree.merge_isomorphic().unwrap();
        let groups = tree.assign_path_ids();
        let mut w = Writer::new();
        tree.serialize_skeleton(&mut w);
        let bytes = w.into_bytes();
        let mut r = Reader::new(&bytes, "skeleton");
        let decoded = DecodedSkeleton::parse(&mut r).unwrap();
        r.finish().unwrap();
        assert_eq!(decoded.terminals.len(), groups.len());
        for g in &groups {
            assert_eq!(decoded.skeleton_of(g.path_id).unwrap(), g.skeleton);
        }
    }

    #[test]
    fn empty_line_terminates_root() {
        let mut tree = tree_from_lines(&[b"", b"a"]);
        let groups = tree.assign_path_ids();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].path_id, 0);
        assert!(groups[0].skeleton.is_empty(), "empty line maps to the root");
    }
}
