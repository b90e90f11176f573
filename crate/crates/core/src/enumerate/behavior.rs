//! Observable outcomes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value};

use crate::litmus::{Location, Program};

/// Final registers plus the co-maximal value per location.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Behavior {
    pub regs: BTreeMap<(usize, String), i64>,
    pub mem: BTreeMap<Location, i64>,
    /// Per-location co order of non-init write values (strict mode only).
    pub co: Option<BTreeMap<Location, Vec<i64>>>,
}

impl Behavior {
    pub fn reg(&self, tid: usize, r: &str) -> Option<i64> {
        self.regs.get(&(tid, r.to_string())).copied()
    }

    /// Evaluates `p.outcome`; absent clause means true.
    pub fn satisfies(&self, p: &Program) -> bool {
        let Some(pred) = &p.outcome else { return true };
        let reg = |t: &str, r: &str| p.thread_index(t).and_then(|tid| self.reg(tid, r)).unwrap_or(0);
        let mem = |l: &Location| self.mem.get(l).copied().or_else(|| p.init.get(l).copied()).unwrap_or(0);
        pred.eval(&reg, &mem)
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut s = String::new();
        for (k, ((t, r), v)) in self.regs.iter().enumerate() {
            if k > 0 {
                s.push(' ');
            }
            let name = names.get(*t).map(String::as_str).unwrap_or("?");
            s.push_str(&format!("{name}:{r}={v}"));
        }
        s.push_str(" |");
        for (l, v) in &self.mem {
            s.push_str(&format!(" {l}={v}"));
        }
        if let Some(co) = &self.co {
            s.push_str(" |");
            for (l, vs) in co {
                let vs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
                s.push_str(&format!(" {l}:{}", vs.join(",")));
            }
        }
        s.trim_start().to_string()
    }

    pub fn to_json(&self, names: &[String]) -> Value {
        let regs: serde_json::Map<String, Value> = self
            .regs
            .iter()
            .map(|((t, r), v)| (format!("{}:{r}", names.get(*t).map(String::as_str).unwrap_or("?")), json!(v)))
            .collect();
        let mem: serde_json::Map<String, Value> = self.mem.iter().map(|(l, v)| (l.to_string(), json!(v))).collect();
        let mut o = json!({ "regs": regs, "mem": mem });
        if let Some(co) = &self.co {
            let co: serde_json::Map<String, Value> = co.iter().map(|(l, v)| (l.to_string(), json!(v))).collect();
            o["co"] = Value::Object(co);
        }
        o
    }
}

/// Canonical sorted set of behaviors of one program.
#[derive(Debug, Clone)]
pub struct BehaviorSet {
    pub thread_names: Vec<String>,
    pub items: BTreeSet<Behavior>,
}

impl PartialEq for BehaviorSet {
    fn eq(&self, o: &Self) -> bool {
        self.items == o.items
    }
}
impl Eq for BehaviorSet {}

impl BehaviorSet {
    pub fn new(thread_names: Vec<String>) -> Self {
        BehaviorSet { thread_names, items: BTreeSet::new() }
    }
    pub fn len(&self) -> usize {
        self.items.len()
    }
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
    pub fn contains(&self, b: &Behavior) -> bool {
        self.items.contains(b)
    }
    /// Behaviors satisfying the program's outcome clause.
    pub fn matching<'a>(&'a self, p: &'a Program) -> impl Iterator<Item = &'a Behavior> + 'a {
        self.items.iter().filter(move |b| b.satisfies(p))
    }

    pub fn lines(&self) -> Vec<String> {
        let mut v: Vec<String> = self.items.iter().map(|b| b.render(&self.thread_names)).collect();
        v.sort();
        v
    }

    pub fn to_json(&self) -> Value {
        json!({
            "threads": self.thread_names,
            "behaviors": self.items.iter().map(|b| b.to_json(&self.thread_names)).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for BehaviorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `Ok` iff every behavior of `sub` is in `sup`; otherwise the first one that is not.
pub fn included(sub: &BehaviorSet, sup: &BehaviorSet) -> Result<(), Behavior> {
    match sub.items.iter().find(|b| !sup.items.contains(b)) {
        Some(b) => Err(b.clone()),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(r: i64, x: i64) -> Behavior {
        Behavior {
            regs: [((0, "r1".to_string()), r)].into_iter().collect(),
            mem: [(Location::named("X"), x)].into_iter().collect(),
            co: None,
        }
    }

    #[test]
    fn inclusion_and_render() {
        let mut a = BehaviorSet::new(vec!["P0".into()]);
        a.items.insert(b(1, 0));
        let mut c = a.clone();
        c.items.insert(b(0, 1));
        assert!(included(&a, &c).is_ok());
        assert!(included(&BehaviorSet::new(vec![]), &a).is_ok());
        assert_eq!(included(&c, &a), Err(b(0, 1)));
        assert_eq!(c.lines(), vec!["P0:r1=0 | X=1", "P0:r1=1 | X=0"]);
        assert_eq!(c.to_json()["behaviors"][0]["regs"]["P0:r1"], 0);
    }
}
