//! Retweet and co-retweeted networks, communities and main actors.

mod community;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::model::{TweetId, TweetRecord, UserId, UserRef};
use crate::numeric::Scalar;

pub use community::{detect_communities, modularity, CommunityAssignment, WeightedGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub user_id: UserId,
    pub screen_name: String,
    pub verified: bool,
    pub followers_count: u64,
    pub description: String,
    /// Relevant records authored by this user.
    pub story_tweet_ids: Vec<TweetId>,
}

impl GraphNode {
    fn from_user(user: &UserRef) -> Self {
        Self {
            user_id: user.user_id,
            screen_name: user.screen_name.clone(),
            verified: user.verified,
            followers_count: user.followers_count,
            description: user.description.clone(),
            story_tweet_ids: Vec::new(),
        }
    }

    pub fn tweets_in_story(&self) -> usize {
        self.story_tweet_ids.len()
    }
}

/// Directed retweeter → retweeted-author graph, weighted by retweet events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetweetGraph {
    pub nodes: BTreeMap<UserId, GraphNode>,
    pub edges: BTreeMap<(UserId, UserId), u64>,
}

impl RetweetGraph {
    /// Distinct users who retweeted `author`.
    pub fn distinct_retweeters(&self, author: UserId) -> usize {
        self.retweeters_of(author).count()
    }

    pub fn retweet_events(&self, author: UserId) -> u64 {
        self.edges
            .iter()
            .filter(|((_, a), _)| *a == author)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn retweeters_of(&self, author: UserId) -> impl Iterator<Item = UserId> + '_ {
        self.edges
            .keys()
            .filter(move |(_, a)| *a == author)
            .map(|(r, _)| *r)
    }

    pub fn authors_retweeted_by(&self, retweeter: UserId) -> impl Iterator<Item = UserId> + '_ {
        self.edges
            .range((retweeter, UserId(0))..=(retweeter, UserId(u64::MAX)))
            .map(|((_, a), _)| *a)
    }

    pub fn out_degree(&self, user: UserId) -> usize {
        self.authors_retweeted_by(user).count()
    }

    /// Distinct-retweeter count for every retweeted author.
    pub fn in_degrees(&self) -> BTreeMap<UserId, usize> {
        let mut out = BTreeMap::new();
        for &(_, author) in self.edges.keys() {
            *out.entry(author).or_default() += 1;
        }
        out
    }

    /// Symmetrized view for community detection.
    pub fn undirected<S: Scalar>(&self, weighted: bool) -> WeightedGraph<S> {
        let mut g = WeightedGraph::new(self.nodes.keys().copied());
        for (&(a, b), &w) in &self.edges {
            g.add_edge(a, b, if weighted { S::from_count(w) } else { S::one() });
        }
        g
    }
}

pub fn build_retweet_graph(relevant: &[&TweetRecord], corpus: &Corpus) -> RetweetGraph {
    let mut graph = RetweetGraph::default();
    for rec in relevant {
        graph
            .nodes
            .entry(rec.author.user_id)
            .or_insert_with(|| GraphNode::from_user(&rec.author))
            .story_tweet_ids
            .push(rec.tweet_id);
    }
    for rec in relevant.iter().filter(|r| r.is_retweet()) {
        let Some(author) = corpus.retweeted_author(rec) else {
            continue;
        };
        if author.user_id == rec.author.user_id {
            continue;
        }
        graph
            .nodes
            .entry(author.user_id)
            .or_insert_with(|| GraphNode::from_user(author));
        *graph
            .edges
            .entry((rec.author.user_id, author.user_id))
            .or_default() += 1;
    }
    graph
}

/// Undirected author–author graph; weight = distinct users who retweeted both.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoRetweetedGraph {
    pub nodes: BTreeSet<UserId>,
    /// Keyed `(low, high)`.
    pub edges: BTreeMap<(UserId, UserId), u64>,
}

impl CoRetweetedGraph {
    pub fn weight(&self, a: UserId, b: UserId) -> u64 {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.get(&key).copied().unwrap_or(0)
    }

    pub fn degree(&self, user: UserId) -> usize {
        self.edges
            .keys()
            .filter(|(a, b)| *a == user || *b == user)
            .count()
    }

    pub fn degrees(&self) -> BTreeMap<UserId, usize> {
        let mut out = BTreeMap::new();
        for &(a, b) in self.edges.keys() {
            *out.entry(a).or_default() += 1;
            *out.entry(b).or_default() += 1;
        }
        out
    }

    pub fn undirected<S: Scalar>(&self, weighted: bool) -> WeightedGraph<S> {
        let mut g = WeightedGraph::new(self.nodes.iter().copied());
        for (&(a, b), &w) in &self.edges {
            g.add_edge(a, b, if weighted { S::from_count(w) } else { S::one() });
        }
        g
    }
}

/// Edges lighter than `min_weight` are dropped; nodes are every retweeted author.
pub fn build_coretweeted_graph(rt: &RetweetGraph, min_weight: u64) -> CoRetweetedGraph {
    let mut by_retweeter: BTreeMap<UserId, Vec<UserId>> = BTreeMap::new();
    for &(retweeter, author) in rt.edges.keys() {
        by_retweeter.entry(retweeter).or_default().push(author);
    }
    let mut graph = CoRetweetedGraph::default();
    for authors in by_retweeter.values() {
        graph.nodes.extend(authors.iter().copied());
        // edge keys iterate sorted, so each list is ascending and duplicate-free
        for (i, &a) in authors.iter().enumerate() {
            for &b in &authors[i + 1..] {
                *graph.edges.entry((a, b)).or_default() += 1;
            }
        }
    }
    graph.edges.retain(|_, w| *w >= min_weight.max(1));
    graph
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub user_id: UserId,
    pub screen_name: String,
    pub distinct_retweeters: usize,
    pub retweet_events: u64,
}

/// Top-`k` retweeted authors by distinct retweeters, then retweet events,
/// then ascending user id.
pub fn main_actors(rt: &RetweetGraph, k: usize) -> Vec<Actor> {
    let mut tally: BTreeMap<UserId, (BTreeSet<UserId>, u64)> = BTreeMap::new();
    for (&(retweeter, author), &w) in &rt.edges {
        let entry = tally.entry(author).or_default();
        entry.0.insert(retweeter);
        entry.1 += w;
    }
    let mut actors: Vec<Actor> = tally
        .into_iter()
        .map(|(user_id, (retweeters, events))| Actor {
            user_id,
            screen_name: rt
                .nodes
                .get(&user_id)
                .map(|n| n.screen_name.clone())
                .unwrap_or_default(),
            distinct_retweeters: retweeters.len(),
            retweet_events: events,
        })
        .collect();
    actors.sort_by(|a, b| {
        b.distinct_retweeters
            .cmp(&a.distinct_retweeters)
            .then(b.retweet_events.cmp(&a.retweet_events))
            .then(a.user_id.cmp(&b.user_id))
    });
    actors.truncate(k);
    actors
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: UserId,
    pub screen_name: String,
    pub verified: bool,
    pub followers_count: u64,
    pub description: String,
    pub story_tweet_ids: Vec<TweetId>,
    pub degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub in_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_degree: Option<usize>,
    pub community: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub source: UserId,
    pub target: UserId,
    pub weight: u64,
}

/// Node-link export consumed by the console.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument<S> {
    pub directed: bool,
    pub modularity: S,
    pub community_count: usize,
    pub nodes: Vec<NetworkNode>,
    pub edges: Vec<NetworkEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryGraphs<S> {
    pub retweet: NetworkDocument<S>,
    pub coretweeted: NetworkDocument<S>,
    pub main_actors: Vec<Actor>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkParams {
    pub weighted_communities: bool,
    pub min_coretweet_weight: u64,
    pub main_actor_count: usize,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            weighted_communities: true,
            min_coretweet_weight: 1,
            main_actor_count: 10,
        }
    }
}

pub fn retweet_document<S: Scalar>(rt: &RetweetGraph, weighted: bool) -> NetworkDocument<S> {
    let communities = detect_communities::<S>(&rt.undirected(weighted));
    let in_degrees = rt.in_degrees();
    let nodes = rt
        .nodes
        .values()
        .map(|n| {
            let in_degree = in_degrees.get(&n.user_id).copied().unwrap_or(0);
            let out_degree = rt.out_degree(n.user_id);
            NetworkNode {
                id: n.user_id,
                screen_name: n.screen_name.clone(),
                verified: n.verified,
                followers_count: n.followers_count,
                description: n.description.clone(),
                story_tweet_ids: n.story_tweet_ids.clone(),
                degree: in_degree + out_degree,
                in_degree: Some(in_degree),
                out_degree: Some(out_degree),
                community: communities.community_of(n.user_id).unwrap_or(0),
            }
        })
        .collect();
    let edges = rt
        .edges
        .iter()
        .map(|(&(source, target), &weight)| NetworkEdge {
            source,
            target,
            weight,
        })
        .collect();
    NetworkDocument {
        directed: true,
        modularity: communities.modularity,
        community_count: communities.community_count(),
        nodes,
        edges,
    }
}

pub fn coretweeted_document<S: Scalar>(
    co: &CoRetweetedGraph,
    rt: &RetweetGraph,
    weighted: bool,
) -> NetworkDocument<S> {
    let communities = detect_communities::<S>(&co.undirected(weighted));
    let degrees = co.degrees();
    let nodes = co
        .nodes
        .iter()
        .map(|&id| {
            let info = rt.nodes.get(&id);
            NetworkNode {
                id,
                screen_name: info.map(|n| n.screen_name.clone()).unwrap_or_default(),
                verified: info.is_some_and(|n| n.verified),
                followers_count: info.map_or(0, |n| n.followers_count),
                description: info.map(|n| n.description.clone()).unwrap_or_default(),
                story_tweet_ids: info.map(|n| n.story_tweet_ids.clone()).unwrap_or_default(),
                degree: degrees.get(&id).copied().unwrap_or(0),
                in_degree: None,
                out_degree: None,
                community: communities.community_of(id).unwrap_or(0),
            }
        })
        .collect();
    let edges = co
        .edges
        .iter()
        .map(|(&(source, target), &weight)| NetworkEdge {
            source,
            target,
            weight,
        })
        .collect();
    NetworkDocument {
        directed: false,
        modularity: communities.modularity,
        community_count: communities.community_count(),
        nodes,
        edges,
    }
}

pub fn build_story_graphs<S: Scalar>(
    relevant: &[&TweetRecord],
    corpus: &Corpus,
    params: &NetworkParams,
) -> StoryGraphs<S> {
    let rt = build_retweet_graph(relevant, corpus);
    let co = build_coretweeted_graph(&rt, params.min_coretweet_weight);
    StoryGraphs {
        retweet: retweet_document(&rt, params.weighted_communities),
        coretweeted: coretweeted_document(&co, &rt, params.weighted_communities),
        main_actors: main_actors(&rt, params.main_actor_count),
    }
}
