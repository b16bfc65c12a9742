//! Finite clopen games.
//!
//! A game is a finite tree; positions of even length belong to Player I,
//! odd length to Player II.  A match is a terminal position, won by Player I
//! when its length is odd and by Player II otherwise.
//!
//! The bisimulation game for a pair of tree nodes has Player I pick a child
//! on one side and Player II answer with a child on the other; whoever
//! cannot move loses.  In the full bisimulation game Player I first names a
//! pair and Player II decides whether to play second (defend the pair) or
//! first (attack it).  The pairs on which a winning Player-II strategy
//! chooses to play second form a bisimulation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::bisim::NodeRelation;
use crate::error::{Error, Result};
use crate::tree::{Dag, FiniteTree, Label, NodeId, Path, DEFAULT_EXPLICIT_LIMIT};

/// A game is a finite tree.
pub type GameTree = FiniteTree;

/// Largest game (in positions) handled by [`exhaustive_winner`].
pub const EXHAUSTIVE_LIMIT: u64 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    I,
    II,
}

impl Player {
    /// The player to move at a position of the given length.
    pub fn to_move(len: usize) -> Player {
        if len.is_multiple_of(2) {
            Player::I
        } else {
            Player::II
        }
    }

    /// The winner of a match (terminal position) of the given length.
    pub fn winner_of_match(len: usize) -> Player {
        if len % 2 == 1 {
            Player::I
        } else {
            Player::II
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::I => Player::II,
            Player::II => Player::I,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::I => "I",
            Player::II => "II",
        })
    }
}

/// A strategy: for each non-terminal position of its owner, the label of the
/// chosen move (the successor is the position extended by that label).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Strategy {
    pub moves: BTreeMap<Path, Label>,
}

impl Strategy {
    pub fn new() -> Self {
        Strategy::default()
    }

    /// The successor position chosen at `pos`, if mapped.
    pub fn successor(&self, pos: &[Label]) -> Option<Path> {
        self.moves.get(pos).map(|l| {
            let mut p = pos.to_vec();
            p.push(l.clone());
            p
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.moves
                .iter()
                .map(|(p, l)| {
                    serde_json::json!([p.iter().map(Label::to_json).collect::<Vec<_>>(), l.to_json()])
                })
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Strategy> {
        let items = v.as_array().ok_or_else(|| Error::Json("a strategy is a list of [position, move]".into()))?;
        let mut s = Strategy::new();
        for it in items {
            match it.as_array().map(Vec::as_slice) {
                Some([p, l]) => {
                    let p = p
                        .as_array()
                        .ok_or_else(|| Error::Json("a position is an array of labels".into()))?
                        .iter()
                        .map(Label::from_json)
                        .collect::<Result<Path>>()?;
                    s.moves.insert(p, Label::from_json(l)?);
                }
                _ => return Err(Error::Json("each entry is [position, move]".into())),
            }
        }
        Ok(s)
    }
}

/// Winner of the subgame at a DAG node entered at a position of parity
/// `len % 2`, memoized on (node, parity).
fn winner_at(dag: &Dag, node: NodeId, parity: usize, memo: &mut HashMap<(NodeId, usize), Player>) -> Player {
    if let Some(&w) = memo.get(&(node, parity)) {
        return w;
    }
    // Iterative post-order to stay clear of deep recursion.
    let mut stack = vec![(node, parity, false)];
    while let Some((n, p, expanded)) = stack.pop() {
        if memo.contains_key(&(n, p)) {
            continue;
        }
        let kids = dag.children(n);
        if kids.is_empty() {
            memo.insert((n, p), Player::winner_of_match(p));
            continue;
        }
        if !expanded {
            stack.push((n, p, true));
            for (_, c) in kids {
                if !memo.contains_key(&(*c, 1 - p)) {
                    stack.push((*c, 1 - p, false));
                }
            }
        } else {
            let mover = Player::to_move(p);
            let w = if kids.iter().any(|(_, c)| memo[&(*c, 1 - p)] == mover) { mover } else { mover.other() };
            memo.insert((n, p), w);
        }
    }
    memo[&(node, parity)]
}

/// The winner under optimal play, without building strategies.
pub fn winner(g: &GameTree) -> Player {
    winner_at(g.dag(), g.root(), 0, &mut HashMap::new())
}

/// Backward-induction solution of a game.
#[derive(Clone, Debug)]
pub struct Solution {
    pub winner: Player,
    /// Optimal strategies for both players, total on their non-terminal
    /// positions.  At each position the owner takes the least winning move
    /// if there is one, else the least move.
    pub strategy_i: Strategy,
    pub strategy_ii: Strategy,
}

impl Solution {
    /// The winner's strategy, which is winning.
    pub fn winning_strategy(&self) -> &Strategy {
        match self.winner {
            Player::I => &self.strategy_i,
            Player::II => &self.strategy_ii,
        }
    }
}

/// Solve a game by backward induction.
pub fn solve(g: &GameTree) -> Result<Solution> {
    solve_bounded(g, DEFAULT_EXPLICIT_LIMIT)
}

/// [`solve`] with an explicit bound on the number of positions.
pub fn solve_bounded(g: &GameTree, limit: u64) -> Result<Solution> {
    let ex = g.explicit_bounded(limit)?;
    let dag = g.dag();
    let mut memo = HashMap::new();
    let win = winner_at(dag, g.root(), 0, &mut memo);
    let (mut si, mut sii) = (Strategy::new(), Strategy::new());
    for i in 0..ex.len() {
        if ex.is_terminal(i) {
            continue;
        }
        let depth = ex.depth(i);
        let owner = Player::to_move(depth);
        let kids = dag.children(ex.dag_node[i]);
        let pick = kids
            .iter()
            .find(|(_, c)| winner_at(dag, *c, (depth + 1) % 2, &mut memo) == owner)
            .unwrap_or(&kids[0]);
        let s = if owner == Player::I { &mut si } else { &mut sii };
        s.moves.insert(ex.paths[i].clone(), pick.0.clone());
    }
    Ok(Solution { winner: win, strategy_i: si, strategy_ii: sii })
}

/// The match reached when both players follow their strategies.
pub fn play(g: &GameTree, s_i: &Strategy, s_ii: &Strategy) -> Result<Path> {
    let dag = g.dag();
    let mut node = g.root();
    let mut pos: Path = Vec::new();
    loop {
        let kids = dag.children(node);
        if kids.is_empty() {
            return Ok(pos);
        }
        let s = if Player::to_move(pos.len()) == Player::I { s_i } else { s_ii };
        let Some(l) = s.moves.get(&pos) else {
            return Err(Error::InvalidStrategy(format!("no move at position {}", show(&pos))));
        };
        let Ok(k) = kids.binary_search_by(|(x, _)| x.cmp(l)) else {
            return Err(Error::InvalidStrategy(format!("move {l} is not legal at {}", show(&pos))));
        };
        node = kids[k].1;
        pos.push(l.clone());
    }
}

fn show(p: &[Label]) -> String {
    format!("({})", p.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","))
}

/// Whether `s` is a winning strategy for `player`: every match consistent
/// with it is won by `player`.  Fails if `s` is undefined or illegal at a
/// position it must answer.
pub fn is_winning(g: &GameTree, s: &Strategy, player: Player) -> Result<bool> {
    let dag = g.dag();
    let mut stack: Vec<(NodeId, Path)> = vec![(g.root(), Vec::new())];
    while let Some((node, pos)) = stack.pop() {
        let kids = dag.children(node);
        if kids.is_empty() {
            if Player::winner_of_match(pos.len()) != player {
                return Ok(false);
            }
            continue;
        }
        if Player::to_move(pos.len()) == player {
            let Some(l) = s.moves.get(&pos) else {
                return Err(Error::InvalidStrategy(format!("no move at position {}", show(&pos))));
            };
            let Ok(k) = kids.binary_search_by(|(x, _)| x.cmp(l)) else {
                return Err(Error::InvalidStrategy(format!("move {l} is not legal at {}", show(&pos))));
            };
            let mut p = pos.clone();
            p.push(l.clone());
            stack.push((kids[k].1, p));
        } else {
            for (l, c) in kids {
                let mut p = pos.clone();
                p.push(l.clone());
                stack.push((*c, p));
            }
        }
    }
    Ok(true)
}

/// Every strategy of `player` (total on the player's non-terminal
/// positions).
pub fn all_strategies(g: &GameTree, player: Player) -> Result<Vec<Strategy>> {
    let ex = g.explicit_bounded(EXHAUSTIVE_LIMIT)?;
    let dag = g.dag();
    let mut out = vec![Strategy::new()];
    for i in 0..ex.len() {
        if ex.is_terminal(i) || Player::to_move(ex.depth(i)) != player {
            continue;
        }
        let kids = dag.children(ex.dag_node[i]);
        let mut next = Vec::with_capacity(out.len() * kids.len());
        for s in &out {
            for (l, _) in kids {
                let mut s2 = s.clone();
                s2.moves.insert(ex.paths[i].clone(), l.clone());
                next.push(s2);
            }
        }
        out = next;
    }
    Ok(out)
}

/// Exhaustive minimax over all strategy pairs (games of at most
/// [`EXHAUSTIVE_LIMIT`] positions): Player I wins iff some strategy of I
/// beats every strategy of II.  Also checks determinacy — exactly one
/// player has a strategy beating all opponents — and fails otherwise.
pub fn exhaustive_winner(g: &GameTree) -> Result<Player> {
    let ex = g.explicit_bounded(EXHAUSTIVE_LIMIT)?;
    // slot[i] = index of position i among its owner's non-terminal positions.
    let mut slot = vec![0usize; ex.len()];
    let mut radix: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, si) in slot.iter_mut().enumerate() {
        if !ex.is_terminal(i) {
            let o = ex.depth(i) % 2;
            *si = radix[o].len();
            radix[o].push(ex.children[i].len());
        }
    }
    let strategies = |r: &[usize]| -> Vec<Vec<usize>> {
        let mut out = vec![Vec::with_capacity(r.len())];
        for &k in r {
            out = out.into_iter().flat_map(|s| (0..k).map(move |c| [s.as_slice(), &[c]].concat())).collect();
        }
        out
    };
    let (si, sii) = (strategies(&radix[0]), strategies(&radix[1]));
    let outcome = |x: &[usize], y: &[usize]| -> Player {
        let mut i = 0;
        while !ex.is_terminal(i) {
            let s = if ex.depth(i) % 2 == 0 { x } else { y };
            i = ex.children[i][s[slot[i]]];
        }
        Player::winner_of_match(ex.depth(i))
    };
    let table: Vec<Vec<Player>> = si.iter().map(|x| sii.iter().map(|y| outcome(x, y)).collect()).collect();
    let i_wins = table.iter().any(|row| row.iter().all(|&w| w == Player::I));
    let ii_wins = (0..sii.len()).any(|b| table.iter().all(|row| row[b] == Player::II));
    if i_wins == ii_wins {
        return Err(Error::ContractViolation("determinacy fails on a finite game".into()));
    }
    Ok(if i_wins { Player::I } else { Player::II })
}

/// Whether `s` beats every opponent strategy, checked by enumeration.
pub fn beats_all_opponents(g: &GameTree, s: &Strategy, player: Player) -> Result<bool> {
    for o in all_strategies(g, player.other())? {
        let m = match player {
            Player::I => play(g, s, &o)?,
            Player::II => play(g, &o, s)?,
        };
        if Player::winner_of_match(m.len()) != player {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Apply `f` to every move label.
pub fn relabel(g: &GameTree, f: &dyn Fn(&Label) -> Label) -> GameTree {
    let seqs = g.sequences().expect("bounded by caller");
    FiniteTree::from_sequences_closed(seqs.into_iter().map(|p| p.iter().map(f).collect()))
}

// ---------------------------------------------------------------------------
// Bisimulation games.
// ---------------------------------------------------------------------------

struct GameBuilder<'a> {
    t: &'a FiniteTree,
    dag: Dag,
    memo: HashMap<(NodeId, NodeId), NodeId>,
}

impl<'a> GameBuilder<'a> {
    fn new(t: &'a FiniteTree) -> Self {
        GameBuilder { t, dag: Dag::new(), memo: HashMap::new() }
    }

    /// The pair game from nodes `(x, y)` of t's DAG, Player I to move.
    /// I's moves are `⟨side, label⟩`; II answers with a label on the other
    /// side.
    fn pair(&mut self, x: NodeId, y: NodeId) -> NodeId {
        if let Some(&n) = self.memo.get(&(x, y)) {
            return n;
        }
        let td = self.t.dag();
        let (xs, ys) = (td.children(x).to_vec(), td.children(y).to_vec());
        let mut edges = Vec::new();
        for (l, cx) in &xs {
            let answers: Vec<(Label, NodeId)> = ys.iter().map(|(m, cy)| (m.clone(), self.pair(*cx, *cy))).collect();
            let n = self.dag.node(answers);
            edges.push((Label::tuple(vec![Label::Int(0), l.clone()]), n));
        }
        for (m, cy) in &ys {
            let answers: Vec<(Label, NodeId)> = xs.iter().map(|(l, cx)| (l.clone(), self.pair(*cx, *cy))).collect();
            let n = self.dag.node(answers);
            edges.push((Label::tuple(vec![Label::Int(1), m.clone()]), n));
        }
        let n = self.dag.node(edges);
        self.memo.insert((x, y), n);
        n
    }
}

fn node_at(t: &FiniteTree, p: &[Label]) -> Result<NodeId> {
    let mut n = t.root();
    for l in p {
        let kids = t.dag().children(n);
        match kids.binary_search_by(|(x, _)| x.cmp(l)) {
            Ok(k) => n = kids[k].1,
            Err(_) => return Err(Error::InvalidInput(format!("{} is not a node of the tree", show(p)))),
        }
    }
    Ok(n)
}

/// The bisimulation game on `t` for the pair `(σ, τ)`.
pub fn bisimulation_game(t: &FiniteTree, pair: (&[Label], &[Label])) -> Result<GameTree> {
    let (x, y) = (node_at(t, pair.0)?, node_at(t, pair.1)?);
    let mut b = GameBuilder::new(t);
    let root = b.pair(x, y);
    Ok(FiniteTree::new(b.dag, root))
}

/// The label of Player I's opening move naming a pair.
pub fn pair_move(sigma: &[Label], tau: &[Label]) -> Label {
    Label::tuple(vec![Label::str("pair"), Label::tuple(sigma.to_vec()), Label::tuple(tau.to_vec())])
}

/// Player II's choice to defend the pair (play second in the pair game).
pub fn second_move() -> Label {
    Label::str("second")
}

/// Player II's choice to attack the pair (play first in the pair game).
pub fn first_move() -> Label {
    Label::str("first")
}

/// The full bisimulation game: I names a pair; II answers `"second"`
/// (the pair game follows, I moving first) or `"first"` (I makes the forced
/// move `"pass"`, then the pair game follows with the roles exchanged).
pub fn full_bisimulation_game(t: &FiniteTree) -> Result<GameTree> {
    let ex = t.explicit()?;
    let mut b = GameBuilder::new(t);
    let mut edges = Vec::new();
    for (i, p) in ex.paths.iter().enumerate() {
        for (j, q) in ex.paths.iter().enumerate() {
            let inner = b.pair(ex.dag_node[i], ex.dag_node[j]);
            let pass = b.dag.prefix(Label::str("pass"), inner);
            let choice = b.dag.node(vec![(first_move(), pass), (second_move(), inner)]);
            edges.push((pair_move(p, q), choice));
        }
    }
    let root = b.dag.node(edges);
    Ok(FiniteTree::new(b.dag, root))
}

/// `{(σ,τ) : s answers the pair (σ,τ) with "second"}`, after checking that
/// `s` is a winning Player-II strategy for the full bisimulation game.
pub fn bisim_from_strategy(t: &FiniteTree, s: &Strategy) -> Result<NodeRelation> {
    let g = full_bisimulation_game(t)?;
    if !is_winning(&g, s, Player::II)? {
        return Err(Error::NonWinningStrategy("the strategy loses some match of the full bisimulation game".into()));
    }
    let ex = t.explicit()?;
    let mut r = NodeRelation::new();
    for p in &ex.paths {
        for q in &ex.paths {
            if s.moves.get(&vec![pair_move(p, q)]) == Some(&second_move()) {
                r.insert(p.clone(), q.clone());
            }
        }
    }
    Ok(r)
}

/// A winning Player-II strategy for the full bisimulation game, restricted
/// to the positions it can reach (the game for every pair is solved on the
/// shared DAG; only reachable positions are listed).
pub fn full_game_strategy(t: &FiniteTree) -> Result<Strategy> {
    let g = full_bisimulation_game(t)?;
    let dag = g.dag();
    let mut memo = HashMap::new();
    let mut s = Strategy::new();
    let mut stack: Vec<(NodeId, Path)> = vec![(g.root(), Vec::new())];
    while let Some((node, pos)) = stack.pop() {
        let kids = dag.children(node);
        if kids.is_empty() {
            continue;
        }
        let depth = pos.len();
        if Player::to_move(depth) == Player::II {
            let pick = kids
                .iter()
                .find(|(_, c)| winner_at(dag, *c, (depth + 1) % 2, &mut memo) == Player::II)
                .unwrap_or(&kids[0]);
            s.moves.insert(pos.clone(), pick.0.clone());
            let mut p = pos;
            p.push(pick.0.clone());
            stack.push((pick.1, p));
        } else {
            for (l, c) in kids {
                let mut p = pos.clone();
                p.push(l.clone());
                stack.push((*c, p));
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisim::{is_bisimulation, maximal_bisimulation};

    fn t(seqs: &[&[i64]]) -> FiniteTree {
        FiniteTree::from_sequences_closed(seqs.iter().map(|s| s.iter().map(|&x| Label::Int(x)).collect()))
    }

    #[test]
    fn conventions() {
        assert_eq!(solve(&FiniteTree::singleton()).unwrap().winner, Player::II);
        assert_eq!(solve(&t(&[&[0]])).unwrap().winner, Player::I);
        assert_eq!(solve(&t(&[&[0, 0]])).unwrap().winner, Player::II);
        assert_eq!(solve(&t(&[&[0, 0], &[1]])).unwrap().winner, Player::I);
    }

    #[test]
    fn play_and_strategies() {
        let g = t(&[&[0, 0], &[1]]);
        let sol = solve(&g).unwrap();
        assert_eq!(play(&g, &sol.strategy_i, &sol.strategy_ii).unwrap(), vec![Label::Int(1)]);
        assert!(is_winning(&g, sol.winning_strategy(), Player::I).unwrap());
        assert!(beats_all_opponents(&g, sol.winning_strategy(), Player::I).unwrap());
        assert!(matches!(play(&g, &Strategy::new(), &sol.strategy_ii), Err(Error::InvalidStrategy(_))));
        assert_eq!(exhaustive_winner(&g).unwrap(), Player::I);
    }

    #[test]
    fn pair_games() {
        let tree = t(&[&[0, 0], &[1]]);
        let leaf = [Label::Int(1)];
        let inner = [Label::Int(0)];
        assert_eq!(winner(&bisimulation_game(&tree, (&leaf, &leaf)).unwrap()), Player::II);
        assert_eq!(winner(&bisimulation_game(&tree, (&leaf, &inner)).unwrap()), Player::I);
        assert_eq!(winner(&bisimulation_game(&tree, (&[], &[])).unwrap()), Player::II);
    }

    #[test]
    fn full_game() {
        let tree = t(&[&[0, 0], &[1], &[2, 0]]);
        let g = full_bisimulation_game(&tree).unwrap();
        assert_eq!(winner(&g), Player::II);
        let s = full_game_strategy(&tree).unwrap();
        let b = bisim_from_strategy(&tree, &s).unwrap();
        assert!(is_bisimulation(&tree, &b).unwrap());
        assert_eq!(b, maximal_bisimulation(&tree).unwrap());
        let single = bisim_from_strategy(&FiniteTree::singleton(), &full_game_strategy(&FiniteTree::singleton()).unwrap()).unwrap();
        assert_eq!(single.pairs.into_iter().collect::<Vec<_>>(), vec![(vec![], vec![])]);
    }

    #[test]
    fn losing_strategy_rejected() {
        let tree = t(&[&[0]]);
        let mut s = full_game_strategy(&tree).unwrap();
        let k = vec![pair_move(&[], &[Label::Int(0)])];
        s.moves.insert(k, second_move());
        assert!(matches!(bisim_from_strategy(&tree, &s), Err(Error::NonWinningStrategy(_)) | Err(Error::InvalidStrategy(_))));
    }
}
