//! Finite games in normal form.
//!
//! Outcomes are identified with their payoff vectors and preferences with
//! `<=` on payoffs. A play `q` *counters* a play `p` when every component
//! of `q` is a best reply to `p`; a play that counters itself is a pure
//! Nash equilibrium. The mixed extension scores product distributions by
//! expected payoff, and two-player mixed equilibria are found by support
//! enumeration.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::error::{Error, Result};

/// Largest number of plays any enumeration here will walk.
pub const ENUMERATION_CAP: usize = 1 << 22;

/// Tolerance for indifference and deviation checks on mixed profiles.
pub const EQUILIBRIUM_TOL: f64 = 1e-9;

/// Largest strategy count accepted by [`FiniteGame::support_enumeration_2p`].
pub const SUPPORT_ENUMERATION_MAX: usize = 5;

/// One strategy index per player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Play(pub Vec<usize>);

impl Play {
    pub fn new(strategies: impl Into<Vec<usize>>) -> Self {
        Play(strategies.into())
    }

    fn with(&self, player: usize, strategy: usize) -> Play {
        let mut next = self.0.clone();
        next[player] = strategy;
        Play(next)
    }
}

/// A probability vector per player.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile(Vec<Vec<f64>>);

impl MixedProfile {
    pub fn new(distributions: Vec<Vec<f64>>) -> Result<Self> {
        for (i, d) in distributions.iter().enumerate() {
            if d.iter().any(|&p| p < 0.0 || !p.is_finite()) {
                return Err(Error::InvalidProfile(format!("player {i} has a negative or non-finite weight")));
            }
            let total: f64 = d.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidProfile(format!("player {i} weights sum to {total}")));
            }
        }
        Ok(MixedProfile(distributions))
    }

    /// All mass on `play`.
    pub fn pure(game: &FiniteGame, play: &Play) -> Result<Self> {
        game.check_play(play)?;
        Ok(MixedProfile(
            game.counts
                .iter()
                .zip(&play.0)
                .map(|(&n, &s)| (0..n).map(|k| if k == s { 1.0 } else { 0.0 }).collect())
                .collect(),
        ))
    }

    pub fn distributions(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn player(&self, i: usize) -> &[f64] {
        &self.0[i]
    }

    /// Largest coordinate difference, or infinity on shape mismatch.
    pub fn max_abs_diff(&self, other: &MixedProfile) -> f64 {
        if self.0.len() != other.0.len() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for (a, b) in self.0.iter().zip(&other.0) {
            if a.len() != b.len() {
                return f64::INFINITY;
            }
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGame {
    counts: Vec<usize>,
    /// Row-major over plays (last player fastest); within a play, one
    /// payoff per player.
    payoffs: Vec<f64>,
}

impl FiniteGame {
    pub fn new(counts: Vec<usize>, payoffs: Vec<f64>) -> Result<Self> {
        let plays = count_plays(&counts)?;
        if payoffs.len() != plays * counts.len() {
            return Err(Error::InvalidGame(format!(
                "expected {} payoffs, found {}",
                plays * counts.len(),
                payoffs.len()
            )));
        }
        if payoffs.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidGame("payoffs must be finite".into()));
        }
        Ok(FiniteGame { counts, payoffs })
    }

    /// Builds a game from a payoff function evaluated on every play.
    pub fn from_fn(counts: Vec<usize>, mut payoff: impl FnMut(&Play) -> Vec<f64>) -> Result<Self> {
        count_plays(&counts)?;
        let mut payoffs = Vec::new();
        for play in plays_of(&counts) {
            let row = payoff(&play);
            if row.len() != counts.len() {
                return Err(Error::InvalidGame("payoff vector length differs from player count".into()));
            }
            payoffs.extend(row);
        }
        FiniteGame::new(counts, payoffs)
    }

    /// Two-player game from row and column payoff matrices.
    pub fn bimatrix(row: &[Vec<f64>], col: &[Vec<f64>]) -> Result<Self> {
        let m = row.len();
        let n = row.first().map_or(0, Vec::len);
        if col.len() != m || row.iter().chain(col).any(|r| r.len() != n) {
            return Err(Error::InvalidGame("payoff matrices must share one rectangular shape".into()));
        }
        FiniteGame::from_fn(vec![m, n], |p| vec![row[p.0[0]][p.0[1]], col[p.0[0]][p.0[1]]])
    }

    /// Payoffs drawn independently and uniformly from `[0, 1)`.
    pub fn random(counts: Vec<usize>, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let players = counts.len();
        FiniteGame::from_fn(counts, |_| (0..players).map(|_| rng.gen::<f64>()).collect())
    }

    pub fn num_players(&self) -> usize {
        self.counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn num_plays(&self) -> usize {
        self.counts.iter().product()
    }

    /// Every play in lexicographic order.
    pub fn plays(&self) -> impl Iterator<Item = Play> + '_ {
        plays_of(&self.counts)
    }

    fn index(&self, play: &Play) -> usize {
        play.0
            .iter()
            .zip(&self.counts)
            .fold(0, |acc, (&s, &c)| acc * c + s)
    }

    fn check_play(&self, play: &Play) -> Result<()> {
        if play.0.len() != self.counts.len() {
            return Err(Error::InvalidPlay(format!(
                "{} strategies for {} players",
                play.0.len(),
                self.counts.len()
            )));
        }
        for (i, (&s, &c)) in play.0.iter().zip(&self.counts).enumerate() {
            if s >= c {
                return Err(Error::InvalidPlay(format!("player {i} has no strategy {s}")));
            }
        }
        Ok(())
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player < self.counts.len() {
            Ok(())
        } else {
            Err(Error::InvalidPlay(format!("no player {player}")))
        }
    }

    /// `G_i(play)`.
    pub fn payoff(&self, player: usize, play: &Play) -> Result<f64> {
        self.check_play(play)?;
        self.check_player(player)?;
        Ok(self.payoff_unchecked(player, play))
    }

    fn payoff_unchecked(&self, player: usize, play: &Play) -> f64 {
        self.payoffs[self.index(play) * self.counts.len() + player]
    }

    /// Strategies of `player` that maximize its payoff against the rest of
    /// `play`, ascending.
    pub fn best_replies(&self, play: &Play, player: usize) -> Result<Vec<usize>> {
        self.check_play(play)?;
        self.check_player(player)?;
        let values: Vec<f64> = (0..self.counts[player])
            .map(|r| self.payoff_unchecked(player, &play.with(player, r)))
            .collect();
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((0..values.len()).filter(|&r| values[r] == best).collect())
    }

    /// Whether `candidate` counters `play`: each player's strategy in
    /// `candidate` is a best reply to `play`.
    pub fn counters(&self, candidate: &Play, play: &Play) -> Result<bool> {
        self.check_play(candidate)?;
        for (i, &s) in candidate.0.iter().enumerate() {
            if !self.best_replies(play, i)?.contains(&s) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The countering set of `play`: the product of the players' best-reply
    /// sets, in lexicographic order.
    pub fn counter_set(&self, play: &Play) -> Result<Vec<Play>> {
        let replies = (0..self.num_players())
            .map(|i| self.best_replies(play, i))
            .collect::<Result<Vec<_>>>()?;
        let size: usize = replies.iter().map(Vec::len).product();
        if size > ENUMERATION_CAP {
            return Err(Error::EnumerationCap { plays: size, cap: ENUMERATION_CAP });
        }
        let lens: Vec<usize> = replies.iter().map(Vec::len).collect();
        Ok(plays_of(&lens)
            .map(|idx| Play(idx.0.iter().zip(&replies).map(|(&k, r)| r[k]).collect()))
            .collect())
    }

    /// Self-countering plays in lexicographic order.
    pub fn enumerate_pure_nash(&self) -> Result<Vec<Play>> {
        let mut out = Vec::new();
        for play in self.plays() {
            if self.counters(&play, &play)? {
                out.push(play);
            }
        }
        Ok(out)
    }

    /// Expected payoff to `player` under the product distribution `profile`.
    pub fn expected_payoff(&self, profile: &MixedProfile, player: usize) -> Result<f64> {
        self.check_player(player)?;
        self.check_profile(profile)?;
        let mut total = 0.0;
        for play in self.plays() {
            let weight: f64 = play.0.iter().enumerate().map(|(j, &s)| profile.0[j][s]).product();
            if weight != 0.0 {
                total += weight * self.payoff_unchecked(player, &play);
            }
        }
        Ok(total)
    }

    fn check_profile(&self, profile: &MixedProfile) -> Result<()> {
        let shape_ok = profile.0.len() == self.counts.len()
            && profile.0.iter().zip(&self.counts).all(|(d, &c)| d.len() == c);
        if shape_ok {
            Ok(())
        } else {
            Err(Error::InvalidProfile("profile shape does not match the game".into()))
        }
    }

    /// Payoff to `player` for each of its pure strategies against `profile`.
    pub fn pure_strategy_values(&self, profile: &MixedProfile, player: usize) -> Result<Vec<f64>> {
        self.check_player(player)?;
        self.check_profile(profile)?;
        (0..self.counts[player])
            .map(|s| {
                let mut dist = profile.0.clone();
                dist[player] = (0..self.counts[player]).map(|k| if k == s { 1.0 } else { 0.0 }).collect();
                self.expected_payoff(&MixedProfile(dist), player)
            })
            .collect()
    }

    /// All mixed equilibria of a two-player game reachable by square support
    /// enumeration. For each pair of equal-size supports the indifference
    /// system is solved for both players; solutions that are probability
    /// vectors and leave no profitable pure deviation are kept. Singular
    /// systems are skipped. Duplicates within [`EQUILIBRIUM_TOL`] are merged.
    pub fn support_enumeration_2p(&self) -> Result<Vec<MixedProfile>> {
        if self.num_players() != 2 {
            return Err(Error::InvalidGame(format!(
                "support enumeration needs 2 players, game has {}",
                self.num_players()
            )));
        }
        let (m, n) = (self.counts[0], self.counts[1]);
        if m > SUPPORT_ENUMERATION_MAX || n > SUPPORT_ENUMERATION_MAX {
            return Err(Error::InvalidGame(format!(
                "support enumeration is limited to {SUPPORT_ENUMERATION_MAX} strategies per player"
            )));
        }
        let row = |i: usize, j: usize| self.payoff_unchecked(0, &Play(vec![i, j]));
        let col = |i: usize, j: usize| self.payoff_unchecked(1, &Play(vec![i, j]));

        let mut found: Vec<MixedProfile> = Vec::new();
        for k in 1..=m.min(n) {
            for rows in subsets(m, k) {
                for cols in subsets(n, k) {
                    // column mix that makes the row player indifferent on `rows`
                    let Some(y) = solve_indifference(&rows, &cols, row) else {
                        continue;
                    };
                    // row mix that makes the column player indifferent on `cols`
                    let Some(x) = solve_indifference(&cols, &rows, |j, i| col(i, j)) else {
                        continue;
                    };
                    let x = spread(m, &rows, &x);
                    let y = spread(n, &cols, &y);
                    let profile = MixedProfile(vec![x, y]);
                    if !self.is_mixed_equilibrium(&profile)? {
                        continue;
                    }
                    if found.iter().all(|f| f.max_abs_diff(&profile) > EQUILIBRIUM_TOL) {
                        found.push(profile);
                    }
                }
            }
        }
        Ok(found)
    }

    /// No player gains more than [`EQUILIBRIUM_TOL`] by any pure deviation.
    pub fn is_mixed_equilibrium(&self, profile: &MixedProfile) -> Result<bool> {
        for i in 0..self.num_players() {
            let current = self.expected_payoff(profile, i)?;
            let values = self.pure_strategy_values(profile, i)?;
            if values.iter().any(|&v| v > current + EQUILIBRIUM_TOL) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Parses `{"players": N, "counts": [..], "payoffs": nested}` where
    /// `payoffs` is nested N deep by strategy index and each leaf is the
    /// payoff vector of that play.
    pub fn from_json(text: &str) -> Result<Self> {
        let root: Value = serde_json::from_str(text)?;
        let bad = |m: &str| Error::InvalidGame(m.to_string());
        let players = root
            .get("players")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing integer field `players`"))? as usize;
        let counts: Vec<usize> = root
            .get("counts")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing array field `counts`"))?
            .iter()
            .map(|c| c.as_u64().map(|c| c as usize).ok_or_else(|| bad("counts must be integers")))
            .collect::<Result<_>>()?;
        if counts.len() != players {
            return Err(bad("`counts` length differs from `players`"));
        }
        let nested = root.get("payoffs").ok_or_else(|| bad("missing field `payoffs`"))?;
        let mut flat = Vec::new();
        flatten_payoffs(nested, &counts, players, &mut flat)?;
        FiniteGame::new(counts, flat)
    }

    pub fn to_json(&self) -> String {
        let payoffs = self.nest(0, &mut Vec::new());
        serde_json::json!({
            "players": self.num_players(),
            "counts": self.counts,
            "payoffs": payoffs,
        })
        .to_string()
    }

    fn nest(&self, depth: usize, prefix: &mut Vec<usize>) -> Value {
        if depth == self.counts.len() {
            let play = Play(prefix.clone());
            return Value::from(
                (0..self.num_players())
                    .map(|i| self.payoff_unchecked(i, &play))
                    .collect::<Vec<f64>>(),
            );
        }
        let mut items = Vec::with_capacity(self.counts[depth]);
        for s in 0..self.counts[depth] {
            prefix.push(s);
            items.push(self.nest(depth + 1, prefix));
            prefix.pop();
        }
        Value::Array(items)
    }
}

fn count_plays(counts: &[usize]) -> Result<usize> {
    if counts.is_empty() {
        return Err(Error::InvalidGame("a game needs at least one player".into()));
    }
    if counts.contains(&0) {
        return Err(Error::InvalidGame("every player needs at least one strategy".into()));
    }
    counts
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .filter(|&p| p <= ENUMERATION_CAP)
        .ok_or(Error::EnumerationCap { plays: usize::MAX, cap: ENUMERATION_CAP })
}

fn flatten_payoffs(node: &Value, counts: &[usize], players: usize, out: &mut Vec<f64>) -> Result<()> {
    let items = node
        .as_array()
        .ok_or_else(|| Error::InvalidGame("payoffs must be nested arrays".into()))?;
    match counts.split_first() {
        None => {
            if items.len() != players {
                return Err(Error::InvalidGame(format!(
                    "payoff leaf has {} entries for {players} players",
                    items.len()
                )));
            }
            for v in items {
                out.push(v.as_f64().ok_or_else(|| Error::InvalidGame("payoffs must be numbers".into()))?);
            }
            Ok(())
        }
        Some((&count, rest)) => {
            if items.len() != count {
                return Err(Error::InvalidGame(format!(
                    "expected {count} entries at this depth, found {}",
                    items.len()
                )));
            }
            items.iter().try_for_each(|child| flatten_payoffs(child, rest, players, out))
        }
    }
}

fn plays_of(counts: &[usize]) -> impl Iterator<Item = Play> + '_ {
    let total: usize = counts.iter().product();
    (0..total).map(move |mut idx| {
        let mut s = vec![0; counts.len()];
        for k in (0..counts.len()).rev() {
            s[k] = idx % counts[k];
            idx /= counts[k];
        }
        Play(s)
    })
}

/// `k`-element subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect();
    out.sort();
    out
}

/// Finds a distribution over `mixers` that makes the opponent indifferent
/// across `responders`, where `value(r, c)` is the opponent's payoff for
/// responder strategy `r` against mixer strategy `c`. Returns `None` for
/// singular systems or solutions outside the simplex.
fn solve_indifference(responders: &[usize], mixers: &[usize], value: impl Fn(usize, usize) -> f64) -> Option<Vec<f64>> {
    let k = mixers.len();
    // unknowns: the k mixing weights, then the common value
    let mut a = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut b = DVector::<f64>::zeros(k + 1);
    for (r, &resp) in responders.iter().enumerate() {
        for (c, &mix) in mixers.iter().enumerate() {
            a[(r, c)] = value(resp, mix);
        }
        a[(r, k)] = -1.0;
    }
    for c in 0..k {
        a[(k, c)] = 1.0;
    }
    b[k] = 1.0;
    let lu = a.clone().lu();
    let solution = lu.solve(&b)?;
    if solution.iter().any(|x| !x.is_finite()) || (&a * &solution - &b).amax() > EQUILIBRIUM_TOL {
        return None;
    }
    let mut weights: Vec<f64> = solution.iter().take(k).copied().collect();
    if weights.iter().any(|&w| w < -EQUILIBRIUM_TOL) {
        return None;
    }
    for w in &mut weights {
        *w = w.max(0.0);
    }
    let total: f64 = weights.iter().sum();
    Some(weights.into_iter().map(|w| w / total).collect())
}

fn spread(n: usize, support: &[usize], weights: &[f64]) -> Vec<f64> {
    let mut full = vec![0.0; n];
    for (&s, &w) in support.iter().zip(weights) {
        full[s] = w;
    }
    full
}
