use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qfa::classical::{bilinearize, linsys_equiv, moqfa_to_pfa, LinearSystem};
use qfa::constructions::{
    mm_complement, mm_complement_one_sided, mm_intersect, mm_inverse_hom, mm_power,
    mm_strip_left_endmarker, mm_tensor, mm_union, mo_strip_left_endmarker, word_quotient,
    Homomorphism, QuotientSide, TwoMarkerMm, TwoMarkerMo,
};
use qfa::gallery;
use qfa::numerics::CMatrix;
use qfa::ptest::{compile, parse_expr};
use qfa::qfa::{probability_table, word_string, Alphabet, MmQfa, RunTrace, Word, END_MARKER};

use crate::error::{usage, CliError, CliResult};
use crate::format::{from_json, matrix_from_json, to_json, Automaton};
use crate::{Command, ConstructOp, ExampleName, Side};

const CENT: char = '¢';

fn load(path: &Path) -> CliResult<Automaton> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_json(&text)
}

fn save(path: &Path, a: &Automaton) -> CliResult<()> {
    fs::write(path, to_json(a)).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_mm(path: &Path) -> CliResult<MmQfa> {
    match load(path)? {
        Automaton::Mm { automaton, cent: None } => Ok(automaton),
        Automaton::Mm { cent: Some(_), .. } => Err(usage(format!(
            "{} has a left end-marker; run `construct strip-endmarker` first",
            path.display()
        ))),
        other => Err(usage(format!(
            "{} holds a {} automaton; this command needs mm",
            path.display(),
            other.kind_name()
        ))),
    }
}

fn parse_word(text: &str, alphabet: &Alphabet) -> CliResult<Word> {
    let w: Word = text.chars().collect();
    if let Some(&c) = w.iter().find(|&&c| !alphabet.contains(c)) {
        return Err(usage(format!("symbol {c:?} is not in the alphabet {{{alphabet}}}")));
    }
    Ok(w)
}

fn quoted(w: &[char]) -> String {
    format!("\"{}\"", word_string(w))
}

/// Acceptance probability of `w` under any automaton kind.
fn probability(a: &Automaton, w: &[char]) -> CliResult<f64> {
    Ok(match a {
        Automaton::Mo { automaton, cent: None, .. } => automaton.accept_prob(w)?,
        Automaton::Mo { automaton, cent: Some(c), .. } => {
            TwoMarkerMo::new(automaton.clone(), c.clone())?.accept_prob(w)?
        }
        Automaton::Mm { automaton, cent: None } => automaton.accept_prob(w)?,
        Automaton::Mm { automaton, cent: Some(c) } => {
            TwoMarkerMm::new(automaton.clone(), c.clone())?.accept_prob(w)?
        }
        Automaton::Dfa(d) => f64::from(u8::from(d.accepts(w)?)),
        Automaton::Pfa(p) => p.accept_prob(w)?,
        Automaton::Linsys(s) => s.evaluate(w)?,
    })
}

pub fn dispatch(command: Command) -> CliResult<u8> {
    match command {
        Command::Run { file, word, trace } => run(&file, &word, trace),
        Command::ProbTable { file, max_len } => prob_table(&file, max_len),
        Command::Compile {
            alphabet,
            expr,
            output,
        } => compile_cmd(&alphabet, &expr, &output),
        Command::Construct { op } => construct(op),
        Command::Check {
            file,
            partial_order,
            gfa,
            rfa,
            irreversible: _,
        } => check(&file, partial_order, gfa, rfa),
        Command::Equiv { a, b, tol } => equiv(&a, &b, tol),
        Command::ToPfa {
            file,
            cut_point,
            output,
        } => to_pfa(&file, cut_point, &output),
        Command::Example { name, output } => example(name, output.as_deref()),
        Command::Validate { file, tol } => validate(&file, tol),
    }
}

fn print_mm_trace(t: &RunTrace, offset: usize) {
    for (k, step) in t.steps.iter().enumerate() {
        let s = &step.state;
        println!(
            "step {} {:?}: p_acc = {}, p_rej = {}, remaining = {}",
            k + offset,
            step.symbol,
            s.p_acc,
            s.p_rej,
            s.vector.norm_sq()
        );
    }
}

fn run(file: &Path, text: &str, trace: bool) -> CliResult<u8> {
    let a = load(file)?;
    let w = parse_word(text, a.alphabet())?;
    let (p_acc, p_rej, leftover) = match &a {
        Automaton::Mm { automaton, cent } => {
            let (start, offset) = match cent {
                None => (automaton.initial.clone(), 1),
                Some(c) => {
                    let s = TwoMarkerMm::new(automaton.clone(), c.clone())?.after_cent()?;
                    if trace {
                        println!(
                            "step 1 {CENT:?}: p_acc = {}, p_rej = {}, remaining = {}",
                            s.p_acc,
                            s.p_rej,
                            s.vector.norm_sq()
                        );
                    }
                    (s, 2)
                }
            };
            let t = automaton.run_from(&start, &w, true)?;
            if trace {
                print_mm_trace(&t, offset);
            }
            (t.p_acc(), t.p_rej(), t.leftover())
        }
        Automaton::Mo { automaton, cent, .. } => {
            if trace {
                let mut v = automaton.initial.clone();
                let mut symbols: Vec<(char, &CMatrix)> = Vec::new();
                if let Some(c) = cent {
                    symbols.push((CENT, c));
                }
                for &c in w.iter().chain([&END_MARKER]) {
                    symbols.push((c, automaton.matrix(c)?));
                }
                for (k, (c, u)) in symbols.into_iter().enumerate() {
                    v = u.mat_vec(&v)?;
                    let weight = v.weight_on(automaton.accepting.iter().copied());
                    println!("step {} {c:?}: accepting weight = {weight}", k + 1);
                }
            }
            let p = probability(&a, &w)?;
            (p, 1.0 - p, 0.0)
        }
        _ => {
            let p = probability(&a, &w)?;
            if let Automaton::Linsys(_) = a {
                println!("value = {p}");
                return Ok(0);
            }
            (p, 1.0 - p, 0.0)
        }
    };
    println!("p_acc = {p_acc}");
    println!("p_rej = {p_rej}");
    println!("leftover = {leftover}");
    if let Automaton::Pfa(pfa) = &a {
        println!("cut_point = {}", pfa.cut_point);
    }
    Ok(0)
}

fn prob_table(file: &Path, max_len: usize) -> CliResult<u8> {
    let a = load(file)?;
    let rows: Vec<(Word, f64)> = match &a {
        Automaton::Mm { automaton, cent: None } => probability_table(automaton, max_len)?,
        _ => a
            .alphabet()
            .words_up_to(max_len)
            .into_iter()
            .map(|w| probability(&a, &w).map(|p| (w, p)))
            .collect::<CliResult<_>>()?,
    };
    for (w, p) in rows {
        println!("{}\t{p}", quoted(&w));
    }
    Ok(0)
}

fn compile_cmd(alphabet: &str, expr: &str, output: &Path) -> CliResult<u8> {
    let alphabet = Alphabet::parse(alphabet).map_err(|e| usage(e.to_string()))?;
    let e = parse_expr(expr, &alphabet).map_err(|e| usage(e.to_string()))?;
    let c = compile(&e, &alphabet)?;
    print!("{}", c.report);
    println!("states: {}", c.automaton.n_states());
    println!("certificate: {}", c.certificate);
    save(output, &c.automaton.into())?;
    Ok(0)
}

fn report_mm(m: MmQfa, output: &Path) -> CliResult<u8> {
    println!("states: {}", m.n_states());
    match &m.certificate {
        Some(c) => println!("certificate: {c}"),
        None => println!("certificate: none"),
    }
    save(output, &m.into())?;
    Ok(0)
}

fn parse_map(entry: &str) -> CliResult<(char, Word)> {
    let (lhs, rhs) = entry
        .split_once('=')
        .ok_or_else(|| usage(format!("--map {entry:?} must look like a=xy")))?;
    let mut it = lhs.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok((c, rhs.chars().collect())),
        _ => Err(usage(format!("--map {entry:?}: left side must be one symbol"))),
    }
}

fn parse_powers(text: &str) -> CliResult<(u32, u32)> {
    let bad = || usage(format!("--powers {text:?} must look like 2,3"));
    let (s, t) = text.split_once(',').ok_or_else(bad)?;
    Ok((s.trim().parse().map_err(|_| bad())?, t.trim().parse().map_err(|_| bad())?))
}

fn cent_matrix(arg: &str, n: usize) -> CliResult<CMatrix> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        return matrix_from_json(arg, n);
    }
    let text = fs::read_to_string(arg).map_err(|source| CliError::Io {
        path: arg.to_string(),
        source,
    })?;
    matrix_from_json(&text, n)
}

fn construct(op: ConstructOp) -> CliResult<u8> {
    match op {
        ConstructOp::Complement {
            input,
            one_sided,
            output,
        } => {
            let m = load_mm(&input)?;
            let out = if one_sided {
                mm_complement_one_sided(&m)?
            } else {
                mm_complement(&m)
            };
            report_mm(out, &output)
        }
        ConstructOp::InverseHom {
            input,
            maps,
            output,
        } => {
            let m = load_mm(&input)?;
            let mut images = BTreeMap::new();
            let mut order = Vec::new();
            for entry in &maps {
                let (c, img) = parse_map(entry)?;
                if images.insert(c, img).is_some() {
                    return Err(usage(format!("symbol {c:?} is mapped twice")));
                }
                order.push(c);
            }
            let domain = Alphabet::new(order).map_err(|e| usage(e.to_string()))?;
            let h = Homomorphism::new(domain, images).map_err(|e| usage(e.to_string()))?;
            report_mm(mm_inverse_hom(&m, &h)?, &output)
        }
        ConstructOp::Quotient {
            input,
            word,
            side,
            output,
        } => {
            let m = load_mm(&input)?;
            let u = parse_word(&word, &m.alphabet)?;
            let side = match side {
                Side::Left => QuotientSide::Left,
                Side::Right => QuotientSide::Right,
            };
            report_mm(word_quotient(&m, &u, side)?, &output)
        }
        ConstructOp::StripEndmarker {
            input,
            cent_matrix: flag,
            output,
        } => {
            let a = load(&input)?;
            let (n, file_cent) = match &a {
                Automaton::Mo { automaton, cent, .. } => (automaton.n_states(), cent.clone()),
                Automaton::Mm { automaton, cent } => (automaton.n_states(), cent.clone()),
                other => {
                    return Err(usage(format!(
                        "strip-endmarker needs an mo or mm file, got {}",
                        other.kind_name()
                    )))
                }
            };
            let cent = match (flag, file_cent) {
                (Some(arg), _) => cent_matrix(&arg, n)?,
                (None, Some(c)) => c,
                (None, None) => {
                    return Err(usage("no cent matrix in the file; pass --cent-matrix"))
                }
            };
            match a {
                Automaton::Mo { automaton, .. } => {
                    let m = mo_strip_left_endmarker(&TwoMarkerMo::new(automaton, cent)?)?;
                    println!("states: {}", m.n_states());
                    save(&output, &m.into())?;
                    Ok(0)
                }
                Automaton::Mm { automaton, .. } => {
                    report_mm(mm_strip_left_endmarker(&TwoMarkerMm::new(automaton, cent)?)?, &output)
                }
                _ => unreachable!("kind checked above"),
            }
        }
        ConstructOp::Tensor { a, b, output } => {
            report_mm(mm_tensor(&load_mm(&a)?, &load_mm(&b)?)?, &output)
        }
        ConstructOp::Power { input, k, output } => report_mm(mm_power(&load_mm(&input)?, k)?, &output),
        ConstructOp::Union {
            a,
            b,
            powers,
            output,
        } => {
            let powers = powers.as_deref().map(parse_powers).transpose()?;
            report_mm(mm_union(&load_mm(&a)?, &load_mm(&b)?, powers)?, &output)
        }
        ConstructOp::Intersect { a, b, k, output } => {
            report_mm(mm_intersect(&load_mm(&a)?, &load_mm(&b)?, k)?, &output)
        }
    }
}

fn check(file: &Path, partial_order: bool, gfa: bool, rfa: bool) -> CliResult<u8> {
    let d = match load(file)? {
        Automaton::Dfa(d) => d,
        other => {
            return Err(usage(format!("check needs a dfa file, got {}", other.kind_name())))
        }
    };
    let yes = |b: bool| if b { "yes" } else { "no" };
    let holds = if partial_order {
        let v = d.check_partial_order();
        println!("minimal states: {}", v.minimal.n_states());
        match &v.witness {
            None => println!("partial order condition: satisfied"),
            Some(w) => {
                println!("partial order condition: violated");
                println!("q1 = {}, q2 = {}", w.q1, w.q2);
                println!("x = {}", quoted(&w.x));
                println!("y = {}", quoted(&w.y));
                println!("z = {}", quoted(&w.z));
            }
        }
        v.satisfied
    } else if gfa {
        let b = d.check_gfa();
        println!("group automaton: {}", yes(b));
        b
    } else if rfa {
        let b = d.check_rfa();
        println!("reversible automaton: {}", yes(b));
        b
    } else {
        let v = d.check_irreversible();
        println!("minimal states: {}", v.minimal.n_states());
        println!("irreversible construction: {}", yes(v.present));
        if let Some(w) = &v.witness {
            println!("q1 = {}, q2 = {}", w.q1, w.q2);
            println!("x = {}", quoted(&w.x));
            println!("y = {}", quoted(&w.y));
            println!("z = {}", quoted(&w.z));
        }
        v.present
    };
    Ok(if holds { 0 } else { 1 })
}

fn as_linear_system(path: &Path) -> CliResult<LinearSystem> {
    match load(path)? {
        Automaton::Mo {
            automaton,
            cent: None,
            ..
        } => Ok(bilinearize(&automaton)?),
        Automaton::Linsys(s) => Ok(s),
        other => Err(usage(format!(
            "{}: equiv needs a one-marker mo or a linsys file, got {}",
            path.display(),
            other.kind_name()
        ))),
    }
}

fn equiv(a: &Path, b: &Path, tol: f64) -> CliResult<u8> {
    let v = linsys_equiv(&as_linear_system(a)?, &as_linear_system(b)?, tol)?;
    if v.equivalent {
        println!("equivalent (spanning set of dimension {})", v.span_dim);
        return Ok(0);
    }
    println!("not equivalent");
    if let Some(w) = &v.separating_word {
        println!("separating word: {}", quoted(w));
    }
    if let Some((x, y)) = v.values {
        println!("values: {x} vs {y}");
    }
    Ok(1)
}

fn to_pfa(file: &Path, cut: Option<f64>, output: &Path) -> CliResult<u8> {
    let (m, file_cut) = match load(file)? {
        Automaton::Mo {
            automaton,
            cent: None,
            cut_point,
        } => (automaton, cut_point),
        other => {
            return Err(usage(format!(
                "to-pfa needs a one-marker mo file, got {}",
                other.kind_name()
            )))
        }
    };
    let source = cut.or(file_cut).unwrap_or(0.0);
    let p = moqfa_to_pfa(&m, source)?;
    println!("states: {}", p.n_states());
    println!("source cut-point: {source}");
    println!("cut-point: {}", p.cut_point);
    save(output, &Automaton::Pfa(p))?;
    Ok(0)
}

fn example(name: ExampleName, output: Option<&Path>) -> CliResult<u8> {
    let a: Automaton = match name {
        ExampleName::Rotation => gallery::rotation().into(),
        ExampleName::FreeGroup => gallery::free_group().into(),
        ExampleName::Parity => Automaton::Dfa(gallery::parity_dfa()),
        ExampleName::EndsWithB => Automaton::Dfa(gallery::ends_with_b()),
        ExampleName::EndmarkDemo => gallery::endmark_demo().into(),
    };
    match output {
        Some(path) => save(path, &a)?,
        None => print!("{}", to_json(&a)),
    }
    Ok(0)
}

fn validate(file: &Path, tol: f64) -> CliResult<u8> {
    let a = load(file)?;
    let mut problems: Vec<String> = match &a {
        Automaton::Mo { automaton, .. } => automaton.validate(tol).iter().map(|d| d.to_string()).collect(),
        Automaton::Mm { automaton, .. } => automaton.validate(tol).iter().map(|d| d.to_string()).collect(),
        Automaton::Pfa(p) => {
            let defect = p.stochasticity_defect();
            if defect > tol {
                vec![format!("[stochastic] row-sum defect {defect:e}")]
            } else {
                vec![]
            }
        }
        Automaton::Dfa(_) | Automaton::Linsys(_) => vec![],
    };
    if let Automaton::Mo { cent: Some(c), .. } | Automaton::Mm { cent: Some(c), .. } = &a {
        if !c.is_unitary(tol) {
            problems.push(format!("[unitarity] cent matrix deviates by {:e}", c.unitarity_defect()?.0));
        }
    }
    if problems.is_empty() {
        println!("ok: {} automaton is well-formed", a.kind_name());
        return Ok(0);
    }
    for p in &problems {
        println!("{p}");
    }
    Ok(1)
}
