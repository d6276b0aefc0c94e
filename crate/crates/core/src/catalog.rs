//! Named bundles and the `T_{P^{1|1}}` reproduction report.

use serde::Serialize;

use crate::cohomology::{cech_cohomology, hom_superdim};
use crate::error::{Error, Result};
use crate::sheaf::{euler_cotangent, euler_tangent, make_split, Bundle, SplitBundle, TransitionBundle};
use crate::splitting::{split_certify, Verdict};
use crate::supermodule::SuperDim;
use crate::superring::SuperSpaceSig;

fn parse_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<i64>()
                .map_err(|_| Error::Invalid(format!("bad twist {p:?}")))
        })
        .collect()
}

/// Look up a builtin bundle by name.
///
/// Names: `O`, `O(a)`, `zero`, `split:a,b;c` (even twists before the `;`,
/// odd after), `tangent`, `cotangent`.
pub fn builtin(name: &str, space: SuperSpaceSig) -> Result<Bundle> {
    let name = name.trim();
    if name == "O" {
        return Ok(Bundle::Split(SplitBundle::new(space, vec![0], vec![])));
    }
    if name == "zero" {
        return Ok(Bundle::Split(SplitBundle::new(space, vec![], vec![])));
    }
    if let Some(inner) = name.strip_prefix("O(").and_then(|s| s.strip_suffix(')')) {
        let a = parse_list(inner)?;
        if a.len() != 1 {
            return Err(Error::Invalid(format!("bad line bundle {name:?}")));
        }
        return Ok(Bundle::Split(SplitBundle::new(space, a, vec![])));
    }
    if let Some(lists) = name.strip_prefix("split:") {
        let (even, odd) = lists.split_once(';').unwrap_or((lists, ""));
        return Ok(Bundle::Split(SplitBundle::new(
            space,
            parse_list(even)?,
            parse_list(odd)?,
        )));
    }
    match name {
        "tangent" => Ok(Bundle::Transition(euler_tangent(space)?)),
        "cotangent" => Ok(Bundle::Transition(euler_cotangent(space)?)),
        _ => Err(Error::Invalid(format!("unknown builtin {name:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportLine {
    pub name: String,
    pub quoted: String,
    pub computed: String,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub lines: Vec<ReportLine>,
}

impl Report {
    pub fn mismatches(&self) -> usize {
        self.lines.iter().filter(|l| !l.matches).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lines": self.lines,
            "mismatches": self.mismatches(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&format!(
                "{:<8} {:<28} quoted {:<9} computed {}\n",
                if l.matches { "ok" } else { "MISMATCH" },
                l.name,
                l.quoted,
                l.computed
            ));
        }
        out.push_str(&format!("{} mismatches\n", self.mismatches()));
        out
    }

    fn push(&mut self, name: impl Into<String>, quoted: impl ToString, computed: impl ToString) {
        let (quoted, computed) = (quoted.to_string(), computed.to_string());
        self.lines.push(ReportLine {
            name: name.into(),
            matches: quoted == computed,
            quoted,
            computed,
        });
    }
}

/// Reproduce the `T_{P^{1|1}}` computations against the quoted values.
/// The tangent is a parameter so that a substitute can be fed in.
pub fn tangent_report(tangent: &TransitionBundle, seed: u64) -> Result<Report> {
    let mut report = Report { lines: Vec::new() };
    let t = Bundle::Transition(tangent.clone());
    report.push("Hom(T,T)", SuperDim::new(3, 1), hom_superdim(&t, &t, 0)?);

    let omega = tangent.dual()?;
    for (name, tw, i, quoted) in [
        ("H^0(Omega(1))", 1, 0, SuperDim::new(0, 0)),
        ("H^1(Omega(1))", 1, 1, SuperDim::new(0, 0)),
        ("H^0(Omega)", 0, 0, SuperDim::new(0, 0)),
        ("H^1(Omega)", 0, 1, SuperDim::new(3, 1)),
    ] {
        report.push(name, quoted, cech_cohomology(&omega, tw, i, None)?);
    }

    // O(a) + ΠO(b) depends only on |a - b|; one line per difference
    let space = tangent.space();
    for d in 0..=8i64 {
        let quoted = if d == 0 {
            SuperDim::new(2, 2)
        } else {
            SuperDim::new(2, d as u64 + 1)
        };
        let mut computed = Vec::new();
        for a in -4..=4i64 {
            for b in [a - d, a + d] {
                if (-4..=4).contains(&b) {
                    let f = Bundle::Transition(make_split(space, &[a], &[b]));
                    computed.push(hom_superdim(&f, &f, 0)?);
                }
            }
        }
        computed.sort_by_key(|x| (x.even, x.odd));
        computed.dedup();
        let shown = computed
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",");
        report.push(format!("Hom(O(a)+PiO(b)), |a-b|={d}"), quoted, shown);
    }

    let cert = split_certify(tangent, seed)?;
    let verdict = match cert.verdict {
        Verdict::Splits => "SPLITS",
        Verdict::NotSplit => "NOT_SPLIT",
        Verdict::Inconclusive => "INCONCLUSIVE",
    };
    report.push("T splits?", "NOT_SPLIT", verdict);
    Ok(report)
}
