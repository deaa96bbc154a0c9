//! Benchmark problem generators. The configuration problems are small
//! reconstructions written in the problem language ("-style").

use std::fmt::Write;

/// `n` pigeons in `m` holes, each hole holding at most `cap` pigeons,
/// with an `isIn` predicate.
pub fn pigeonhole(n: u64, m: u64, cap: u64) -> String {
    format!(
        "// pigeonhole({n},{m},{cap})\n\
         type Pigeon size {n}\n\
         type Hole size {m}\n\
         pred isIn(Pigeon, Hole)\n\
         theory {{\n\
         \x20 !p in Pigeon: #{{h in Hole : isIn(p, h)}} = 1.\n\
         \x20 !h in Hole: #{{p in Pigeon : isIn(p, h)}} =< {cap}.\n\
         }}\n"
    )
}

/// Pigeonhole with a `holeOf` function instead of a relation.
pub fn pigeonhole_fn(n: u64, m: u64, cap: u64) -> String {
    format!(
        "// pigeonhole({n},{m},{cap}), function encoding\n\
         type Pigeon size {n}\n\
         type Hole size {m}\n\
         func holeOf(Pigeon) -> Hole\n\
         theory {{\n\
         \x20 !h in Hole: #{{p in Pigeon : holeOf(p) = h}} =< {cap}.\n\
         }}\n"
    )
}

/// Rack-A-style: `4·m` cards are plugged into frames of four slots, frames
/// are mounted in racks holding at most two frames.
pub fn rack_a(m: u64) -> String {
    format!(
        "// Rack-A-style, demand multiplier {m}\n\
         type Rack\n\
         type Frame\n\
         type Card size {cards}\n\
         func frameOf(Card) -> Frame\n\
         func rackOf(Frame) -> Rack\n\
         theory {{\n\
         \x20 !f in Frame: #{{c in Card : frameOf(c) = f}} =< 4.\n\
         \x20 !f in Frame: #{{c in Card : frameOf(c) = f}} > 0.\n\
         \x20 !r in Rack: #{{f in Frame : rackOf(f) = r}} =< 2.\n\
         }}\n",
        cards = 4 * m
    )
}

/// Rack-ABCD-style: `m` cards of each kind A-D. Frames hold at most two
/// cards, kind-A and kind-D cards never share a frame, racks hold at most
/// four frames.
pub fn rack_abcd(m: u64) -> String {
    let kinds = ["A", "B", "C", "D"];
    let mut s = format!("// Rack-ABCD-style, demand multiplier {m}\ntype Rack\ntype Frame\n");
    for k in kinds {
        let _ = writeln!(s, "type Card{k} size {m}");
    }
    for k in kinds {
        let _ = writeln!(s, "func frame{k}(Card{k}) -> Frame");
    }
    s.push_str("func rackOf(Frame) -> Rack\ntheory {\n");
    let count = |k: &str| format!("#{{x in Card{k} : frame{k}(x) = f}}");
    let total: Vec<String> = kinds.iter().map(|k| count(k)).collect();
    let _ = writeln!(s, "  !f in Frame: {} =< 2.", total.join(" + "));
    let _ = writeln!(s, "  !f in Frame: {} = 0 | {} = 0.", count("A"), count("D"));
    s.push_str("  !r in Rack: #{f in Frame : rackOf(f) = r} =< 4.\n}\n");
    s
}

/// House-configuration-style: every person owns `m` things, things go into
/// cabinets of capacity 5 (one owner per cabinet), cabinets into rooms of at
/// most 4 cabinets.
pub fn house(persons: u64, m: u64) -> String {
    format!(
        "// HCP/HRP-style, {persons} persons with {m} things each\n\
         type Person size {persons}\n\
         type Thing size {things}\n\
         type Cabinet\n\
         type Room\n\
         pred owns(Person, Thing)\n\
         func cabinetOf(Thing) -> Cabinet\n\
         func roomOf(Cabinet) -> Room\n\
         theory {{\n\
         \x20 !t in Thing: #{{p in Person : owns(p, t)}} = 1.\n\
         \x20 !p in Person: #{{t in Thing : owns(p, t)}} = {m}.\n\
         \x20 !c in Cabinet: #{{t in Thing : cabinetOf(t) = c}} =< 5.\n\
         \x20 !p in Person, q in Person, t in Thing, u in Thing: owns(p, t) & owns(q, u) & cabinetOf(t) = cabinetOf(u) => p = q.\n\
         \x20 !r in Room: #{{c in Cabinet : roomOf(c) = r}} =< 4.\n\
         }}\n",
        things = persons * m
    )
}

/// Organized-monkey-village-style: monkeys each get a tree; a tree feeds at
/// most three monkeys and needs a keeper; a keeper tends at most two trees.
pub fn monkey(monkeys: u64) -> String {
    format!(
        "// organized-monkey-village-style, {monkeys} monkeys\n\
         type Monkey size {monkeys}\n\
         type Tree\n\
         type Keeper\n\
         func treeOf(Monkey) -> Tree\n\
         func keeperOf(Tree) -> Keeper\n\
         theory {{\n\
         \x20 !t in Tree: #{{x in Monkey : treeOf(x) = t}} =< 3.\n\
         \x20 !t in Tree: #{{x in Monkey : treeOf(x) = t}} > 0.\n\
         \x20 !k in Keeper: #{{t in Tree : keeperOf(t) = k}} =< 2.\n\
         }}\n"
    )
}

/// `|A| > 1 ∧ A ⊆ B ∧ |B ∩ C| ≤ 2` over one generative type.
pub fn bapa() -> String {
    "// BAPA sample\n\
     type D\n\
     pred A(D)\n\
     pred B(D)\n\
     pred C(D)\n\
     theory {\n\
     \x20 #{d in D : A(d)} > 1.\n\
     \x20 !d in D: A(d) => B(d).\n\
     \x20 #{d in D : B(d) & C(d)} =< 2.\n\
     }\n"
        .to_string()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub source: String,
    /// Satisfiable at this size.
    pub expect_sat: bool,
}

fn entry(name: &str, source: String, expect_sat: bool) -> CorpusEntry {
    CorpusEntry {
        name: name.to_string(),
        source,
        expect_sat,
    }
}

/// The reference corpus written by `gen-corpus`.
pub fn reference_corpus() -> Vec<CorpusEntry> {
    vec![
        entry("pigeonhole_10_5_2", pigeonhole(10, 5, 2), true),
        entry("pigeonhole_30_15_2", pigeonhole(30, 15, 2), true),
        entry("pigeonhole_fn_10_5_2", pigeonhole_fn(10, 5, 2), true),
        entry("pigeonhole_5_2_2", pigeonhole(5, 2, 2), false),
        entry("rack_a_2", rack_a(2), true),
        entry("rack_a_5", rack_a(5), true),
        entry("rack_abcd_4", rack_abcd(4), true),
        entry("rack_abcd_8", rack_abcd(8), true),
        entry("house_2_5", house(2, 5), true),
        entry("monkey_6", monkey(6), true),
        entry("bapa", bapa(), true),
    ]
}
