//! Acceptance harness: one line per criterion, then a non-zero exit status
//! if any failed.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use common::*;
use tx_infer::emit::descriptor;
use tx_infer::funtype::{method_descriptor, root_name};
use tx_infer::pipeline::recheck;
use tx_infer::syntax::{ClassDecl, Stmt};
use tx_infer::table::Builtins;
use tx_infer::types::{Tph, Type, BOOLEAN, INTEGER};

const FAC_TIME_LIMIT: Duration = Duration::from_secs(1);
const UNIFY_TIME_LIMIT: Duration = Duration::from_secs(60);
const UNIFY_CASES: u32 = 1000;
const COLLAPSE_CASES: u32 = 500;

const FAC_TYPED: &str = "import java.lang.Integer;
class Fac {
    Integer getFac(Integer n) {
        Integer res = 1;
        Integer i = 1;
        while (i <= n) { res = res * i; i++; }
        return res;
    }
}";

// The completed generics add `AD extends AE` to the published listing.
const TPHS_TYPED: &str = "class TPHsToGenerics<UD extends DZP, DZP extends ETX, ETX> {
    Fun1$$<UD, ETX> id = x -> x;
    <V extends UD> ETX id2(V x) { return id.apply(x); }
    <AM, AN extends AI, AI> AI m(AM a, AN b) { return b; }
    <AA, AB extends AA, AD extends AE, AE> AA m2(AB a, AD b) { AE c = m(a, b); return a; }
}";

const CYCLE_TYPED: &str = "class Cycle { <X> void m(X x, X y) { y = x; x = y; } }";
const INFIMUM_TYPED: &str = "class Infimum { <X> void m(X x, X y, X z) { y = x; z = x; } }";

const OL_SIGS: &str = "OL.m : Integer -> Integer & Double -> Double & String -> String
OL.m : Boolean -> Boolean
OLMain.main : Integer -> Integer & Double -> Double & String -> String & Boolean -> Boolean
";

const OLFUN_DESCRIPTORS: [&str; 3] = [
    "(LFun1$$$_$Double$_$Double$_$;)Double;",
    "(LFun1$$$_$Integer$_$Integer$_$;)Integer;",
    "(LFun1$$$_$String$_$String$_$;)String;",
];

const GOLDENS: [&str; 7] = ["Fac", "TPHsToGenerics", "Mutual", "Cycle", "Infimum", "OL", "OLFun"];

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tph_of(t: &Type) -> String {
    t.as_tph().map(|x| x.0.clone()).unwrap_or_else(|| panic!("{t} is not a placeholder"))
}

fn class_args(t: &Type) -> Vec<String> {
    match t {
        Type::Class { args, .. } | Type::Fun { args, .. } => {
            let mut v: Vec<String> = args.iter().map(tph_of).collect();
            if let Type::Fun { ret: Some(r), .. } = t {
                v.push(tph_of(r));
            }
            v
        }
        _ => panic!("{t} has no arguments"),
    }
}

fn pair_facts(pairs: &[(Tph, Tph)]) -> BTreeSet<Vec<String>> {
    pairs.iter().map(|(a, b)| vec![a.0.clone(), b.0.clone()]).collect()
}

fn lt_facts(pairs: &[(&str, &str)]) -> Vec<Vec<Sym>> {
    pairs.iter().map(|(a, b)| vec![v(a), v(b)]).collect()
}

fn fixed(entries: &[(&str, String)]) -> BTreeMap<String, String> {
    entries.iter().map(|(k, x)| (k.to_string(), x.clone())).collect()
}

fn c1_fac() -> Outcome {
    let start = Instant::now();
    let inf = infer("Fac");
    let elapsed = start.elapsed();
    let c = &inf.classes[0];
    // Unifiers that only widen a declaration to a supertype are not least;
    // the reported set keeps the least ones.
    ensure(c.least.len() == 1, || format!("{} least unifiers", c.least.len()))?;
    let sol = c.chosen_solution();
    ensure(sol.remaining.is_empty(), || format!("remaining {:?}", sol.remaining))?;
    let integer = Type::class(INTEGER);
    for s in &c.constraints.slots {
        let t = sol.apply(&s.ty);
        ensure(t == integer, || format!("slot {:?} typed {t}", s.node))?;
    }
    let decl = &inf.program.classes[0];
    let cond = decl.methods[0]
        .body
        .iter()
        .find_map(|s| if let Stmt::While { cond, .. } = s { Some(cond.id) } else { None })
        .ok_or("no loop")?;
    let ct = sol.apply(&c.constraints.node_types[&cond]);
    ensure(ct == Type::class(BOOLEAN), || format!("loop condition typed {ct}"))?;
    ensure(alpha_eq(&inf.typed_source(), FAC_TYPED), || format!("typed source differs:\n{}", inf.typed_source()))?;
    ensure(elapsed < FAC_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("one least unifier of {}, remaining empty, {} slots Integer, condition Boolean, {elapsed:?}", c.solutions.len(), c.constraints.slots.len()))
}

fn decl_and_labels(name: &str) -> (tx_infer::pipeline::Inference, ClassDecl, BTreeMap<String, Type>) {
    let inf = infer(name);
    let decl = inf.program.classes[0].clone();
    let labels = slot_labels(&decl, &inf.classes[0]);
    (inf, decl, labels)
}

fn c2_tphs_to_generics() -> Outcome {
    let (inf, _, l) = decl_and_labels("TPHsToGenerics");
    let c = &inf.classes[0];
    let g = c.chosen_generics();
    let id = class_args(&l["id"]);
    let anchors = fixed(&[
        ("UD", id[0].clone()),
        ("ETX", id[1].clone()),
        ("V", tph_of(&l["id2.x"])),
        ("AM", tph_of(&l["m.a"])),
        ("AN", tph_of(&l["m.b"])),
        ("AI", tph_of(&l["m.return"])),
        ("AA", tph_of(&l["m2.return"])),
        ("AB", tph_of(&l["m2.a"])),
        ("AD", tph_of(&l["m2.b"])),
        ("AE", tph_of(&l["m2.c"])),
    ]);
    ensure(tph_of(&l["id2.return"]) == anchors["ETX"], || "id2 does not return the field's result type".into())?;
    let cs = lt_facts(&[("UD", "DZP"), ("DZP", "ETX"), ("V", "UD"), ("AN", "AI"), ("AB", "AA"), ("AB", "AM"), ("AD", "AN"), ("AI", "AE")]);
    let map = find_renaming(&cs, &pair_facts(&g.projection.pairs), &anchors)
        .ok_or_else(|| format!("remaining constraints {:?}", g.projection.pairs))?;

    // AA has no bound and so gets Object, like every other unbound parameter.
    let owners = ["class", "id2", "m", "m2"];
    let mut fgg = member_facts("class", &[("UD", "DZP"), ("DZP", "ETX"), ("ETX", "Object")]);
    fgg.extend(member_facts("id2", &[("V", "UD")]));
    fgg.extend(member_facts("m", &[("AN", "AI"), ("AM", "Object"), ("AI", "Object")]));
    fgg.extend(member_facts("m2", &[("AB", "AA"), ("AD", "Object"), ("AE", "Object"), ("AA", "Object")]));
    let fgg_actual = family_facts(&g.fgg, &owners);
    find_renaming(&fgg, &fgg_actual, &map).ok_or_else(|| format!("FGG {fgg_actual:?}"))?;

    let cfgg_actual = family_facts(&g.cfgg, &owners);
    let removed: Vec<_> = fgg_actual.difference(&cfgg_actual).cloned().collect();
    let added: Vec<_> = cfgg_actual.difference(&fgg_actual).cloned().collect();
    let ad = map["AD"].clone();
    let ae = map["AE"].clone();
    ensure(removed == vec![vec!["m2".to_string(), ad.clone(), "Object".into()]], || format!("CFGG removed {removed:?}"))?;
    ensure(added == vec![vec!["m2".to_string(), ad, ae]], || format!("CFGG added {added:?}"))?;
    ensure(alpha_eq(&inf.typed_source(), TPHS_TYPED), || format!("typed source differs:\n{}", inf.typed_source()))?;
    Ok("8 remaining pairs, 4 FGG members, CFGG bounds AD by AE, typed program matches".into())
}

fn c3_mutual() -> Outcome {
    let (inf, _, l) = decl_and_labels("Mutual");
    let c = &inf.classes[0];
    let g = c.chosen_generics();
    let r1 = class_args(&l["m1.return"]);
    let r2 = class_args(&l["m2.return"]);
    let anchors = fixed(&[
        ("B", tph_of(&l["m1.x"])),
        ("C", tph_of(&l["m1.y"])),
        ("BB", r1[0].clone()),
        ("DD", r1[1].clone()),
        ("D", tph_of(&l["m1.y2"])),
        ("F", tph_of(&l["m2.x"])),
        ("G", tph_of(&l["m2.y"])),
        ("HH", r2[0].clone()),
        ("GG", r2[1].clone()),
        ("H", tph_of(&l["m2.x2"])),
        ("I", tph_of(&l["id.return"])),
        ("J", tph_of(&l["id.x"])),
    ]);
    // The published set plus D < DD and H < HH, which its own FGG lists.
    let cs = lt_facts(&[
        ("B", "J"),
        ("BB", "H"),
        ("B", "F"),
        ("C", "G"),
        ("GG", "D"),
        ("F", "B"),
        ("G", "C"),
        ("G", "J"),
        ("I", "BB"),
        ("I", "GG"),
        ("J", "I"),
        ("D", "DD"),
        ("H", "HH"),
    ]);
    let map = find_renaming(&cs, &pair_facts(&g.projection.pairs), &anchors)
        .ok_or_else(|| format!("remaining constraints {:?}", g.projection.pairs))?;
    let owners = ["class", "m1", "m2", "id"];
    let mut fgg = member_facts("m1", &[("B", "Object"), ("C", "Object"), ("D", "DD"), ("DD", "Object"), ("BB", "Object")]);
    fgg.extend(member_facts("m2", &[("F", "Object"), ("G", "Object"), ("H", "HH"), ("HH", "Object"), ("GG", "Object")]));
    fgg.extend(member_facts("id", &[("J", "I"), ("I", "Object")]));
    let fgg_actual = family_facts(&g.fgg, &owners);
    find_renaming(&fgg, &fgg_actual, &map).ok_or_else(|| format!("FGG {fgg_actual:?}"))?;
    cfgg_oracle(c)?;
    // Worked by hand from the closure: the identity calls bound x by the
    // first result component, the recursive calls bound y by the local.
    let mut cfgg = member_facts("m1", &[("B", "BB"), ("C", "D"), ("D", "DD"), ("DD", "Object"), ("BB", "Object")]);
    cfgg.extend(member_facts("m2", &[("F", "H"), ("G", "GG"), ("H", "HH"), ("HH", "Object"), ("GG", "Object")]));
    cfgg.extend(member_facts("id", &[("J", "I"), ("I", "Object")]));
    let cfgg_actual = family_facts(&g.cfgg, &owners);
    find_renaming(&cfgg, &cfgg_actual, &map).ok_or_else(|| format!("CFGG {cfgg_actual:?}"))?;
    let re = recheck(&inf.typed_source(), Builtins::bundled()).map_err(|e| e.to_string())?;
    ensure(re.ok(), || format!("typed program does not re-check: {:?}", re.open))?;
    Ok("13 remaining pairs, 3 FGG members, CFGG matches oracle, typed program re-checks".into())
}

fn c4_conformance() -> Outcome {
    for (name, expected, merged) in [("Cycle", CYCLE_TYPED, 2), ("Infimum", INFIMUM_TYPED, 3)] {
        let inf = infer(name);
        let g = inf.classes[0].chosen_generics();
        let params: Vec<_> = g.family.methods[0].keys().collect();
        ensure(params.len() == 1, || format!("{name}: parameters {params:?}"))?;
        let x = params[0];
        ensure(!g.cfgg.methods[0].contains_key(x), || format!("{name}: {x} is not fresh"))?;
        let into_x = g.h.values().filter(|t| *t == x).count();
        ensure(into_x == merged, || format!("{name}: h maps {into_x} parameters to {x}: {:?}", g.h))?;
        ensure(alpha_eq(&inf.typed_source(), expected), || format!("{name}: typed source differs:\n{}", inf.typed_source()))?;
    }
    Ok("Cycle and Infimum each collapse to a single fresh parameter".into())
}

fn c5_overloading() -> Outcome {
    let inf = infer("OL");
    let sigs = inf.signatures_text();
    ensure(sigs == OL_SIGS, || format!("signatures:\n{sigs}"))?;
    Ok("OL.m three-way, OL.m Boolean, OLMain.main four-way".into())
}

fn c6_descriptors() -> Outcome {
    let inf = infer("OLFun");
    let typings = &inf.classes[0].signatures[0];
    let strict: BTreeSet<String> = typings.iter().map(descriptor).collect();
    ensure(strict.len() == typings.len(), || "descriptors collide".into())?;
    let display: BTreeSet<String> = typings.iter().map(tx_infer::emit::display_descriptor).collect();
    let expected: BTreeSet<String> = OLFUN_DESCRIPTORS.iter().map(|s| s.to_string()).collect();
    ensure(display == expected, || format!("descriptors {display:?}"))?;
    // Erasing every function type to its interface root, as generic types
    // are erased, makes the parameter parts coincide.
    let erase = |t: &Type| match root_name(t) {
        Some(_) => Type::Fun { args: vec![Type::tph("P"); 1], ret: Some(Box::new(Type::tph("R"))) },
        None => t.clone(),
    };
    let erased_params: BTreeSet<String> = typings
        .iter()
        .map(|s| {
            let d = method_descriptor(&s.params.iter().map(erase).collect::<Vec<_>>(), &s.ret);
            d[..d.find(')').unwrap() + 1].to_string()
        })
        .collect();
    let params: BTreeSet<String> = strict.iter().map(|d| d[..d.find(')').unwrap() + 1].to_string()).collect();
    ensure(erased_params.len() == 1, || format!("erased parameter descriptors {erased_params:?}"))?;
    ensure(params.len() == 3, || format!("parameter descriptors {params:?}"))?;
    Ok(format!("3 distinct descriptors; erased form would collide on {}", erased_params.iter().next().unwrap()))
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![(0..3usize).prop_map(Side::Tph), (0..6usize).prop_map(Side::Ground)]
}

fn c7_unify_properties() -> Outcome {
    let table = ground_table();
    let start = Instant::now();
    let strategy = proptest::collection::vec((side(), any::<bool>(), side()), 1..=5);
    runner(UNIFY_CASES)
        .run(&strategy, |raw| check_unify(&build_constraints(&raw), &table).map_err(TestCaseError::fail))
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < UNIFY_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{UNIFY_CASES} sets sound and complete against brute force, {elapsed:?}"))
}

fn c8_collapse_properties() -> Outcome {
    let strategy = (1..=8usize, proptest::collection::vec((0..8usize, 0..8usize), 0..20));
    runner(COLLAPSE_CASES)
        .run(&strategy, |(n, edges)| check_collapse(&graph_member(n, &edges)).map_err(TestCaseError::fail))
        .map_err(|e| e.to_string())?;
    Ok(format!("{COLLAPSE_CASES} graphs: h monotone, result antisymmetric and free of infima"))
}

fn c9_mangling() -> Outcome {
    let n = check_mangling()?;
    Ok(format!("{n} instances injective, decode inverts mangle"))
}

fn c10_recheck() -> Outcome {
    for name in GOLDENS {
        let inf = infer(name);
        let typed = inf.typed_source();
        let golden = golden(&format!("{name}.typed.jtx"));
        ensure(typed == golden, || format!("{name}: output differs from golden"))?;
        let re = recheck(&golden, Builtins::bundled()).map_err(|e| format!("{name}: {e}"))?;
        ensure(re.ok(), || format!("{name}: open classes {:?}", re.open))?;
    }
    Ok(format!("{} goldens re-check with empty remaining constraints", GOLDENS.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Fac golden", c1_fac),
        ("TPHsToGenerics golden", c2_tphs_to_generics),
        ("Mutual golden", c3_mutual),
        ("conformance goldens", c4_conformance),
        ("overloading golden", c5_overloading),
        ("descriptor golden", c6_descriptors),
        ("unification properties", c7_unify_properties),
        ("collapse properties", c8_collapse_properties),
        ("mangling", c9_mangling),
        ("re-check closure", c10_recheck),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
