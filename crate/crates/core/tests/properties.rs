mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use chrono::{TimeZone, Utc};
use proptest::prelude::*;

use common::{contains_seq, day, oracle_h, oracle_relevant, VOCAB};
use rumortrace::burst::{
    bin_intervals, burstiness, burstiness_value, find_breaking_interval, similarity_classes,
};
use rumortrace::corpus::SearchWindow;
use rumortrace::metrics::{h_index, PropagationLevel};
use rumortrace::model::{validate_record, RawRecord, UserRef};
use rumortrace::negation::{split_story, NegationLexicon};
use rumortrace::network::{
    build_coretweeted_graph, build_retweet_graph, detect_communities, modularity, WeightedGraph,
};
use rumortrace::relevancy::build_relevant_set;
use rumortrace::synthetic::{random_corpus, retweet_of, tweet_by};
use rumortrace::text::tokenize;
use rumortrace::timeline::build_timeline;
use rumortrace::{
    Corpus, InvestigationConfig, KeywordRole, KeywordSpec, RequiredMode, TimeWindow, TweetId,
    TweetRecord, UserId,
};

fn big_corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| Corpus::from_records(random_corpus(11, 10_000, VOCAB, 400)).0)
}

// --- strategies ---

fn config_strategy() -> impl Strategy<Value = InvestigationConfig> {
    let kw = (
        0..VOCAB.len(),
        prop_oneof![
            Just(KeywordRole::Required),
            Just(KeywordRole::Optional),
            Just(KeywordRole::Excluded)
        ],
    );
    (
        proptest::collection::btree_map(0..VOCAB.len(), kw.prop_map(|(_, r)| r), 1..6),
        any::<bool>(),
        any::<u32>(),
        proptest::option::of((0i64..86_400, 600i64..43_200)),
    )
        .prop_map(|(kws, at_least_one, thr, window)| {
            let mut c = InvestigationConfig::new(TweetId(1));
            c.keywords = kws
                .into_iter()
                .map(|(i, role)| KeywordSpec::new(VOCAB[i], role))
                .collect();
            c.required_mode = if at_least_one {
                RequiredMode::AtLeastOne
            } else {
                RequiredMode::All
            };
            let optional = c.optional_count() as u32;
            c.optional_threshold = if optional == 0 {
                0
            } else {
                thr % (optional + 1)
            };
            c.time_window = window.map(|(s, len)| TimeWindow(day(s), day(s + len)));
            c
        })
}

fn set(corpus: &Corpus, c: &InvestigationConfig) -> BTreeSet<TweetId> {
    build_relevant_set(corpus, c, &SearchWindow::for_corpus(corpus))
        .tweet_ids
        .into_iter()
        .collect()
}

fn record_strategy() -> impl Strategy<Value = TweetRecord> {
    (
        (
            1u64..u64::MAX / 2,
            0i64..2_000_000_000,
            "\\PC{0,40}",
            0u64..1_000_000_000,
            proptest::option::of(1u64..1_000_000),
        ),
        (
            1u64..1_000_000_000,
            "[A-Za-z_][A-Za-z0-9_]{0,14}",
            0u64..100_000_000,
            any::<bool>(),
            "\\PC{0,20}",
        ),
        (
            proptest::option::of(0i64..2_000_000_000),
            proptest::collection::vec("https://[a-z]{1,8}\\.example/[a-z]{0,6}", 0..3),
            proptest::collection::vec("[a-z0-9]{1,8}", 0..3),
            proptest::option::of("[a-z]{2}"),
        ),
    )
        .prop_map(
            |(
                (id, t, text, rc, parent),
                (uid, name, followers, verified, desc),
                (acct, urls, tags, lang),
            )| {
                TweetRecord {
                    tweet_id: TweetId(id),
                    created_at: Utc.timestamp_opt(t, 0).unwrap(),
                    text,
                    author: UserRef {
                        user_id: UserId(uid),
                        screen_name: name,
                        followers_count: followers,
                        verified,
                        description: desc,
                        account_created_at: acct.map(|a| Utc.timestamp_opt(a, 0).unwrap()),
                    },
                    retweet_count: rc,
                    retweet_of: parent.map(TweetId).filter(|p| p.0 != id),
                    urls,
                    hashtags: tags,
                    lang,
                }
            },
        )
}

/// Random story: originals by authors 1..=authors, retweets by users 100.. .
fn retweet_story(events: &[(u64, usize)], originals: usize, authors: u64) -> Vec<TweetRecord> {
    let mut recs: Vec<TweetRecord> = (0..originals as u64)
        .map(|i| tweet_by(i + 1, 1 + i % authors, "2014-03-27T10:00:00Z", "story"))
        .collect();
    for (n, &(user, target)) in events.iter().enumerate() {
        let orig = recs[target % originals].clone();
        recs.push(retweet_of(
            10_000 + n as u64,
            100 + user,
            "2014-03-27T10:05:00Z",
            &orig,
        ));
    }
    recs
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn exclusion_never_adds(c in config_strategy(), extra in 0..VOCAB.len()) {
        let corpus = big_corpus();
        let base = set(corpus, &c);
        let mut more = c.clone();
        if !more.keywords.iter().any(|k| k.term == VOCAB[extra]) {
            more.keywords.push(KeywordSpec::new(VOCAB[extra], KeywordRole::Excluded));
        }
        prop_assert!(set(corpus, &more).is_subset(&base));
    }

    #[test]
    fn all_required_is_subset_of_any(c in config_strategy()) {
        let corpus = big_corpus();
        let mut all = c.clone();
        all.required_mode = RequiredMode::All;
        let mut any = c;
        any.required_mode = RequiredMode::AtLeastOne;
        prop_assert!(set(corpus, &all).is_subset(&set(corpus, &any)));
    }

    #[test]
    fn threshold_is_monotone(c in config_strategy()) {
        let corpus = big_corpus();
        let mut prev: Option<BTreeSet<TweetId>> = None;
        for t in 0..=c.optional_count() as u32 {
            let mut ct = c.clone();
            ct.optional_threshold = t;
            let cur = set(corpus, &ct);
            if let Some(p) = &prev {
                prop_assert!(cur.is_subset(p), "threshold {t}");
            }
            prev = Some(cur);
        }
    }

    #[test]
    fn relevant_set_matches_full_scan(c in config_strategy()) {
        let corpus = big_corpus();
        let window = SearchWindow::for_corpus(corpus);
        prop_assert_eq!(set(corpus, &c), oracle_relevant(corpus, &c, &window));
    }

    #[test]
    fn search_matches_scan(a in 0..VOCAB.len(), b in 0..VOCAB.len(), phrase in any::<bool>(), horizon in 0.01f64..2.0) {
        let corpus = big_corpus();
        let query = if phrase { format!("{} {}", VOCAB[a], VOCAB[b]) } else { VOCAB[a].to_string() };
        let window = SearchWindow::new(horizon, SearchWindow::for_corpus(corpus).now).unwrap();
        let hits = corpus.search(&query, &window, 18_000).unwrap();
        let got: BTreeSet<TweetId> = hits.iter().map(|r| r.tweet_id).collect();
        let needle = tokenize(&query);
        let want: BTreeSet<TweetId> = corpus
            .records()
            .iter()
            .filter(|r| r.created_at >= window.earliest() && contains_seq(&tokenize(&r.text), &needle))
            .map(|r| r.tweet_id)
            .collect();
        prop_assert_eq!(got.len(), hits.len(), "no duplicates");
        prop_assert_eq!(&got, &want);
        let again: Vec<TweetId> = corpus.search(&query, &window, 18_000).unwrap().iter().map(|r| r.tweet_id).collect();
        prop_assert_eq!(again, hits.iter().map(|r| r.tweet_id).collect::<Vec<_>>());
        prop_assert!(hits.windows(2).all(|w| w[0].created_at >= w[1].created_at), "newest first");
    }

    #[test]
    fn record_round_trip(rec in record_strategy()) {
        let line = rec.to_json_line();
        let raw: RawRecord = serde_json::from_str(&line).unwrap();
        prop_assert_eq!(validate_record(&raw, None).unwrap(), rec);
    }

    #[test]
    fn h_index_matches_scan(counts in proptest::collection::vec(0u64..200, 0..300)) {
        prop_assert_eq!(h_index(&counts), oracle_h(&counts));
    }

    #[test]
    fn h_index_monotone(counts in proptest::collection::vec(0u64..100, 0..100), extra in 0u64..100, idx in any::<usize>(), bump in 1u64..50) {
        let h = h_index(&counts);
        let mut more = counts.clone();
        more.push(extra);
        prop_assert!(h_index(&more) >= h);
        if !counts.is_empty() {
            let mut raised = counts.clone();
            let i = idx % raised.len();
            raised[i] += bump;
            prop_assert!(h_index(&raised) >= h);
        }
    }

    #[test]
    fn union_h_dominates_parts(counts in proptest::collection::vec(0u64..60, 0..80), mask in proptest::collection::vec(any::<bool>(), 80)) {
        let (a, b): (Vec<_>, Vec<_>) = counts.iter().copied().enumerate().partition(|(i, _)| mask[*i]);
        let ha = h_index(&a.iter().map(|p| p.1).collect::<Vec<_>>());
        let hb = h_index(&b.iter().map(|p| p.1).collect::<Vec<_>>());
        prop_assert!(h_index(&counts) >= ha.max(hb));
    }

    #[test]
    fn level_mapping_total(h in any::<u64>()) {
        let level = PropagationLevel::from_h(h);
        let expected = if h <= 16 { "insignificant" } else if h <= 32 { "low" } else if h <= 64 { "moderate" } else if h <= 128 { "high" } else { "extensive" };
        prop_assert_eq!(level.as_str(), expected);
    }

    #[test]
    fn burstiness_bounded(rt in 0u64..1_000_000, prev in 0u64..1_000_000, dt in 1u32..120) {
        let b = burstiness_value(dt as f64, rt as f64, prev as f64);
        prop_assert!((0.0..=1.0).contains(&b));
        let b32 = burstiness_value(dt as f32, rt as f32, prev as f32);
        prop_assert!((0.0..=1.0).contains(&b32));
    }

    #[test]
    fn burstiness_increases_with_jump(d in 0u64..10_000, prev in 0u64..1_000) {
        let lo = burstiness_value(10.0f64, (prev + d) as f64, prev as f64);
        let hi = burstiness_value(10.0f64, (prev + d + 1) as f64, prev as f64);
        prop_assert!(hi > lo);
        // the score depends on the size of the jump only
        let down = burstiness_value(10.0f64, prev as f64, (prev + d) as f64);
        prop_assert_eq!(lo, down);
    }

    #[test]
    fn color_classes_partition(picks in proptest::collection::vec(proptest::collection::vec(0..VOCAB.len(), 1..6), 1..25)) {
        let texts: Vec<String> = picks.iter().map(|p| p.iter().map(|&i| VOCAB[i]).collect::<Vec<_>>().join(" ")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let classes = similarity_classes(&refs, 0.8f64);
        prop_assert_eq!(classes.len(), texts.len());
        // identical texts always share a class
        for i in 0..texts.len() {
            for j in 0..texts.len() {
                if texts[i] == texts[j] {
                    prop_assert_eq!(classes[i], classes[j]);
                }
            }
        }
        // labels are dense and in order of first appearance
        let mut next = 0;
        for &c in &classes {
            prop_assert!(c <= next);
            if c == next { next += 1; }
        }
    }

    #[test]
    fn negation_split_and_lexicon_monotone(seed in 0u64..1_000, add in 0..VOCAB.len()) {
        let recs = random_corpus(seed, 200, &["hoax", "fake", "avión", "mar", "not", "true", "remolcador"], 30);
        let refs: Vec<&TweetRecord> = recs.iter().collect();
        let lex = NegationLexicon::default();
        let (neg, non) = split_story(&refs, &lex);
        let neg_set: BTreeSet<TweetId> = neg.iter().copied().collect();
        let non_set: BTreeSet<TweetId> = non.iter().copied().collect();
        prop_assert!(neg_set.is_disjoint(&non_set));
        prop_assert_eq!(neg_set.len() + non_set.len(), refs.len());
        let wider = lex.customized([VOCAB[add]], Vec::<String>::new()).unwrap();
        let (neg2, _) = split_story(&refs, &wider);
        prop_assert!(neg_set.is_subset(&neg2.into_iter().collect()));
        // removing a base term drops tweets that only matched through it
        let narrower = lex.customized(Vec::<String>::new(), ["hoax"]).unwrap();
        let (neg3, _) = split_story(&refs, &narrower);
        for r in &recs {
            let toks = tokenize(&r.text);
            let only_hoax = toks.contains(&"hoax".to_string())
                && !toks.contains(&"fake".to_string())
                && !toks.windows(2).any(|w| w[0] == "not" && w[1] == "true");
            if only_hoax {
                prop_assert!(!neg3.contains(&r.tweet_id));
            }
        }
    }

    #[test]
    fn timeline_totals(seed in 0u64..1_000) {
        let recs = random_corpus(seed, 300, &["hoax", "avión", "mar", "fake"], 40);
        let refs: Vec<&TweetRecord> = recs.iter().collect();
        let bins = bin_intervals(&refs).unwrap();
        let series = build_timeline(&refs, &bins, &NegationLexicon::default().matcher(), &["mar".into()]).unwrap();
        prop_assert_eq!(series[0].total(), refs.len() as u64);
        for (a, n) in series[0].bins.iter().zip(&series[1].bins) {
            prop_assert!(n.count <= a.count);
        }
        for s in &series {
            let starts: Vec<_> = s.bins.iter().map(|b| b.interval_start).collect();
            prop_assert_eq!(starts, bins.iter().map(|i| i.start).collect::<Vec<_>>());
        }
    }

    #[test]
    fn coretweet_degree_bound_and_overlap(events in proptest::collection::vec((0u64..40, 0usize..30), 0..300)) {
        let recs = retweet_story(&events, 30, 12);
        let refs: Vec<&TweetRecord> = recs.iter().collect();
        let corpus = Corpus::from_records(recs.clone()).0;
        let rt = build_retweet_graph(&refs, &corpus);
        let co = build_coretweeted_graph(&rt, 1);
        for &a in &co.nodes {
            let reach: BTreeSet<UserId> = rt
                .retweeters_of(a)
                .flat_map(|r| rt.authors_retweeted_by(r).collect::<Vec<_>>())
                .filter(|&b| b != a)
                .collect();
            prop_assert!(co.degree(a) <= reach.len());
        }
        let actors = rumortrace::network::main_actors(&rt, 2);
        if actors.len() == 2 {
            let ra: BTreeSet<UserId> = rt.retweeters_of(actors[0].user_id).collect();
            let rb: BTreeSet<UserId> = rt.retweeters_of(actors[1].user_id).collect();
            prop_assert_eq!(ra.intersection(&rb).count() as u64, co.weight(actors[0].user_id, actors[1].user_id));
        }
    }

    #[test]
    fn communities_deterministic_and_total(edges in proptest::collection::vec((0u64..30, 0u64..30, 1u32..5), 0..120)) {
        let build = || {
            let mut g = WeightedGraph::<f64>::new((0..30).map(UserId));
            for &(a, b, w) in &edges {
                g.add_edge(UserId(a), UserId(b), w as f64);
            }
            g
        };
        let g = build();
        let c = detect_communities(&g);
        prop_assert_eq!(c.communities.len(), 30);
        prop_assert_eq!(&c, &detect_communities(&build()));
        prop_assert!((c.modularity - modularity(&g, &c.communities)).abs() < 1e-12);
        // never worse than leaving every node alone
        let singletons: BTreeMap<UserId, usize> = (0..30).map(|i| (UserId(i), i as usize)).collect();
        prop_assert!(c.modularity >= modularity(&g, &singletons) - 1e-9);
    }
}

#[test]
fn planted_burst_sweep() {
    // uniform background b with one planted bin at b + S, at every position
    for b in 0..=10u64 {
        for s in (25 * b + 25..=25 * b + 2_000).step_by(7) {
            for pos in 0..10 {
                let rts: Vec<u64> = (0..10).map(|i| if i == pos { b + s } else { b }).collect();
                let intervals: Vec<rumortrace::model::Interval> = rts
                    .iter()
                    .enumerate()
                    .map(|(index, &rt)| rumortrace::model::Interval {
                        index,
                        start: day(index as i64 * 600),
                        width_secs: 600,
                        tweet_ids: vec![],
                        rt,
                    })
                    .collect();
                let scores = burstiness::<f64>(&intervals, 10.0);
                assert_eq!(
                    find_breaking_interval(&scores, 0.9),
                    pos,
                    "b={b} S={s} pos={pos}"
                );
            }
        }
    }
}

/// Every set partition of `n` nodes as a restricted growth string.
fn for_each_partition(n: usize, f: &mut impl FnMut(&[usize])) {
    fn go(labels: &mut Vec<usize>, n: usize, max: usize, f: &mut impl FnMut(&[usize])) {
        if labels.len() == n {
            f(labels);
            return;
        }
        for c in 0..=max + 1 {
            labels.push(c);
            go(labels, n, max.max(c), f);
            labels.pop();
        }
    }
    let mut labels = vec![0];
    go(&mut labels, n, 0, f);
}

#[test]
fn two_cliques_match_exhaustive_partition_search() {
    let mut g = WeightedGraph::<f64>::new((0..10).map(UserId));
    for base in [0u64, 5] {
        for i in 0..5 {
            for j in i + 1..5 {
                g.add_edge(UserId(base + i), UserId(base + j), 1.0);
            }
        }
    }
    g.add_edge(UserId(4), UserId(5), 1.0);
    let mut best = (f64::MIN, Vec::new());
    let mut count = 0;
    for_each_partition(10, &mut |labels| {
        count += 1;
        let map: BTreeMap<UserId, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, &c)| (UserId(i as u64), c))
            .collect();
        let q = modularity(&g, &map);
        if q > best.0 + 1e-12 {
            best = (q, labels.to_vec());
        }
    });
    assert_eq!(count, 115_975, "Bell(10)");
    let found = detect_communities(&g);
    let labels: Vec<usize> = (0..10)
        .map(|i| found.community_of(UserId(i)).unwrap())
        .collect();
    assert_eq!(labels, best.1);
    assert!((found.modularity - best.0).abs() < 1e-12);
}
