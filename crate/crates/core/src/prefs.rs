//! Preference structures: one ranking of the opposite side per person.
//!
//! Rankings are stored as rank arrays: `women[k]` is the permutation whose
//! value at man `j` is the rank woman `lo + k` gives him, larger is better.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mallows::MallowsParams;
use crate::perm::{IntInterval, Permutation};
use crate::rng::{RngStream, StreamRole};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Woman,
    Man,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Woman => Role::Man,
            Role::Man => Role::Woman,
        }
    }

    fn stream_role(self) -> StreamRole {
        match self {
            Role::Woman => StreamRole::Woman,
            Role::Man => StreamRole::Man,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Person {
    pub index: i64,
    pub role: Role,
}

impl Person {
    pub fn woman(index: i64) -> Self {
        Person { index, role: Role::Woman }
    }

    pub fn man(index: i64) -> Self {
        Person { index, role: Role::Man }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceStructure {
    domain: IntInterval,
    women: Vec<Permutation>,
    men: Vec<Permutation>,
}

impl PreferenceStructure {
    pub fn new(domain: IntInterval, women: Vec<Permutation>, men: Vec<Permutation>) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::BadParameter("preference structure on an empty domain".into()));
        }
        if women.len() != domain.len() || men.len() != domain.len() {
            return Err(Error::DomainMismatch(format!(
                "{} women and {} men for a domain of size {}",
                women.len(),
                men.len(),
                domain.len()
            )));
        }
        if let Some(bad) = women.iter().chain(&men).find(|p| p.domain() != domain) {
            return Err(Error::DomainMismatch(format!(
                "ranking on {} inside a structure on {domain}",
                bad.domain()
            )));
        }
        Ok(PreferenceStructure { domain, women, men })
    }

    /// Everyone ranks the other side in index order.
    pub fn identity(domain: IntInterval) -> Self {
        let id = Permutation::identity(domain);
        PreferenceStructure { domain, women: vec![id.clone(); domain.len()], men: vec![id; domain.len()] }
    }

    /// Independent Mallows rankings for all `2n` persons (trial 0).
    pub fn sample(params: &MallowsParams, domain: IntInterval, master_seed: u64) -> Result<Self> {
        Self::sample_trial(params, domain, master_seed, 0)
    }

    /// Independent Mallows rankings; person `(i, role)` draws from stream `(role, i, trial)`.
    pub fn sample_trial(
        params: &MallowsParams,
        domain: IntInterval,
        master_seed: u64,
        trial: u64,
    ) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::BadParameter("cannot sample on an empty domain".into()));
        }
        let draw = |role: Role| -> Result<Vec<Permutation>> {
            let people: Vec<i64> = domain.iter().collect();
            people
                .par_iter()
                .map(|&i| {
                    let mut rng = RngStream::for_person(master_seed, role.stream_role(), i, trial);
                    params.sample(domain, &mut rng)
                })
                .collect()
        };
        Ok(PreferenceStructure { domain, women: draw(Role::Woman)?, men: draw(Role::Man)? })
    }

    /// The two-matching gadget on `[-m, m]`: identity rankings except that
    /// woman 2 prefers man 1 to man 2 and man 1 prefers woman 1 to woman 2.
    pub fn gadget(m: i64) -> Result<Self> {
        if m < 2 {
            return Err(Error::BadParameter(format!("gadget needs m >= 2, got {m}")));
        }
        Self::identity(IntInterval::new(-m, m)?).with_gadget_at(1)
    }

    /// [`Self::gadget`] translated onto `[1, 2m + 1]`.
    pub fn gadget_shifted(m: i64) -> Result<Self> {
        Ok(Self::gadget(m)?.shifted(m + 1))
    }

    /// Replace the rankings of woman `a + 1` and man `a` by the transposition of `a, a + 1`.
    pub fn with_gadget_at(mut self, a: i64) -> Result<Self> {
        let swap = Permutation::transposition(self.domain, a, a + 1)?;
        let (iw, im) = (self.domain.index_of(a + 1)?, self.domain.index_of(a)?);
        self.women[iw] = swap.clone();
        self.men[im] = swap;
        Ok(self)
    }

    pub fn shifted(&self, by: i64) -> Self {
        PreferenceStructure {
            domain: self.domain.shifted(by),
            women: self.women.iter().map(|p| p.shifted(by)).collect(),
            men: self.men.iter().map(|p| p.shifted(by)).collect(),
        }
    }

    pub fn domain(&self) -> IntInterval {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn women(&self) -> &[Permutation] {
        &self.women
    }

    pub fn men(&self) -> &[Permutation] {
        &self.men
    }

    pub fn rankings(&self, role: Role) -> &[Permutation] {
        match role {
            Role::Woman => &self.women,
            Role::Man => &self.men,
        }
    }

    pub fn ranking(&self, who: Person) -> Result<&Permutation> {
        let k = self.domain.index_of(who.index)?;
        Ok(&self.rankings(who.role)[k])
    }

    /// Whether `who` ranks `a` above `b` (both on the opposite side).
    pub fn prefers(&self, who: Person, a: i64, b: i64) -> Result<bool> {
        let r = self.ranking(who)?;
        if a == b {
            return Err(Error::SamePerson);
        }
        Ok(r.apply(a)? > r.apply(b)?)
    }

    /// Restriction to a subinterval, every ranking replaced by its induced permutation.
    pub fn induced(&self, sub: IntInterval) -> Result<Self> {
        if sub.is_empty() || !self.domain.contains_interval(&sub) {
            return Err(Error::NotSubinterval {
                sub_lo: sub.lo(),
                sub_hi: sub.hi(),
                lo: self.domain.lo(),
                hi: self.domain.hi(),
            });
        }
        let start = (sub.lo() - self.domain.lo()) as usize;
        let pick = |v: &[Permutation]| -> Vec<Permutation> {
            v[start..start + sub.len()].iter().map(|p| p.restrict(sub).expect("subinterval checked")).collect()
        };
        Ok(PreferenceStructure { domain: sub, women: pick(&self.women), men: pick(&self.men) })
    }

    pub fn to_document(&self, q: Option<f64>, seed: Option<u64>) -> PrefsDocument {
        PrefsDocument {
            domain: self.domain,
            q,
            seed,
            women: self.women.iter().map(|p| p.values().to_vec()).collect(),
            men: self.men.iter().map(|p| p.values().to_vec()).collect(),
        }
    }

    /// Canonical JSON: fixed key order, compact, newline-terminated.
    pub fn to_json(&self, q: Option<f64>, seed: Option<u64>) -> String {
        let mut s = serde_json::to_string(&self.to_document(q, seed)).expect("serializable");
        s.push('\n');
        s
    }

    /// One row per person: `role,index,rank_of_<lo>,...,rank_of_<hi>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("role,index");
        for j in self.domain.iter() {
            out.push_str(&format!(",rank_of_{j}"));
        }
        out.push('\n');
        for (role, list) in [(Role::Woman, &self.women), (Role::Man, &self.men)] {
            let name = match role {
                Role::Woman => "woman",
                Role::Man => "man",
            };
            for (i, p) in self.domain.iter().zip(list) {
                out.push_str(&format!("{name},{i}"));
                for v in p.values() {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// On-disk form of a preference structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefsDocument {
    pub domain: IntInterval,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub women: Vec<Vec<i64>>,
    pub men: Vec<Vec<i64>>,
}

fn malformed(path: &str, pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Malformed { path: path.to_string(), pointer: pointer.into(), message: message.into() }
}

fn as_i64(path: &str, pointer: &str, v: &Value) -> Result<i64> {
    v.as_i64().ok_or_else(|| malformed(path, pointer, "expected an integer"))
}

fn as_array<'a>(path: &str, pointer: &str, v: &'a Value) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| malformed(path, pointer, "expected an array"))
}

/// Parse a preference file, reporting faults as `path` plus a JSON pointer.
pub fn parse_prefs_json(path: &str, text: &str) -> Result<(PreferenceStructure, Option<f64>, Option<u64>)> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        malformed(path, "", format!("invalid JSON at line {} column {}: {e}", e.line(), e.column()))
    })?;
    let obj = root.as_object().ok_or_else(|| malformed(path, "", "expected an object"))?;
    let dom = as_array(path, "/domain", obj.get("domain").ok_or_else(|| malformed(path, "/domain", "missing"))?)?;
    if dom.len() != 2 {
        return Err(malformed(path, "/domain", "expected [lo, hi]"));
    }
    let lo = as_i64(path, "/domain/0", &dom[0])?;
    let hi = as_i64(path, "/domain/1", &dom[1])?;
    let domain = IntInterval::new(lo, hi).map_err(|e| malformed(path, "/domain", e.to_string()))?;
    let q = match obj.get("q") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_f64().ok_or_else(|| malformed(path, "/q", "expected a number"))?),
    };
    let seed = match obj.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(v.as_u64().ok_or_else(|| malformed(path, "/seed", "expected an unsigned integer"))?),
    };
    let mut sides = Vec::with_capacity(2);
    for key in ["women", "men"] {
        let ptr = format!("/{key}");
        let rows = as_array(path, &ptr, obj.get(key).ok_or_else(|| malformed(path, &ptr, "missing"))?)?;
        if rows.len() != domain.len() {
            return Err(malformed(
                path,
                &ptr,
                format!("expected {} rankings, found {}", domain.len(), rows.len()),
            ));
        }
        let mut perms = Vec::with_capacity(rows.len());
        for (k, row) in rows.iter().enumerate() {
            let rptr = format!("{ptr}/{k}");
            let vals = as_array(path, &rptr, row)?
                .iter()
                .enumerate()
                .map(|(j, v)| as_i64(path, &format!("{rptr}/{j}"), v))
                .collect::<Result<Vec<_>>>()?;
            perms.push(Permutation::new(domain, vals).map_err(|e| malformed(path, &rptr, e.to_string()))?);
        }
        sides.push(perms);
    }
    let men = sides.pop().unwrap();
    let women = sides.pop().unwrap();
    Ok((PreferenceStructure::new(domain, women, men)?, q, seed))
}

pub fn sample_prefs(params: &MallowsParams, domain: IntInterval, master_seed: u64) -> Result<PreferenceStructure> {
    PreferenceStructure::sample(params, domain, master_seed)
}

pub fn prefers(p: &PreferenceStructure, who: Person, a: i64, b: i64) -> Result<bool> {
    p.prefers(who, a, b)
}

pub fn induced_prefs(p: &PreferenceStructure, sub: IntInterval) -> Result<PreferenceStructure> {
    p.induced(sub)
}

pub fn gadget_structure(m: i64) -> Result<PreferenceStructure> {
    PreferenceStructure::gadget(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: i64, hi: i64) -> IntInterval {
        IntInterval::new(lo, hi).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = MallowsParams::new(0.4).unwrap();
        let a = PreferenceStructure::sample(&p, iv(1, 30), 99).unwrap();
        let b = PreferenceStructure::sample(&p, iv(1, 30), 99).unwrap();
        assert_eq!(a.to_json(Some(0.4), Some(99)), b.to_json(Some(0.4), Some(99)));
        let c = PreferenceStructure::sample_trial(&p, iv(1, 30), 99, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_q_gives_identity() {
        let p = MallowsParams::new(1e-9).unwrap();
        for seed in 0..50 {
            let s = PreferenceStructure::sample(&p, iv(1, 6), seed).unwrap();
            assert_eq!(s, PreferenceStructure::identity(iv(1, 6)));
        }
    }

    #[test]
    fn prefers_semantics() {
        let id = PreferenceStructure::identity(iv(1, 4));
        assert!(id.prefers(Person::woman(1), 3, 2).unwrap());
        assert!(!id.prefers(Person::man(1), 2, 3).unwrap());
        assert_eq!(id.prefers(Person::woman(1), 2, 2), Err(Error::SamePerson));
        assert!(matches!(id.prefers(Person::woman(5), 1, 2), Err(Error::OutOfDomain { .. })));
        assert!(matches!(id.prefers(Person::woman(1), 1, 7), Err(Error::OutOfDomain { .. })));

        let g = PreferenceStructure::gadget(2).unwrap();
        assert!(g.prefers(Person::woman(2), 1, 2).unwrap());
        assert!(g.prefers(Person::man(1), 1, 2).unwrap());
        assert!(!g.prefers(Person::woman(1), 1, 2).unwrap());
        assert!(!g.prefers(Person::man(2), 1, 2).unwrap());
        for who in g.domain().iter().flat_map(|i| [Person::woman(i), Person::man(i)]) {
            for a in g.domain().iter() {
                for b in g.domain().iter().filter(|&b| b != a) {
                    assert_ne!(g.prefers(who, a, b).unwrap(), g.prefers(who, b, a).unwrap());
                }
            }
        }
    }

    #[test]
    fn gadget_shape() {
        for m in [2, 5, 10] {
            let g = PreferenceStructure::gadget(m).unwrap();
            assert_eq!(g.domain(), iv(-m, m));
            for i in g.domain().iter() {
                for role in [Role::Woman, Role::Man] {
                    let r = g.ranking(Person { index: i, role }).unwrap();
                    let special = (role == Role::Woman && i == 2) || (role == Role::Man && i == 1);
                    assert_eq!(r.is_identity(), !special);
                }
            }
        }
        assert!(matches!(PreferenceStructure::gadget(1), Err(Error::BadParameter(_))));
        let g = PreferenceStructure::gadget(5).unwrap();
        let t = g.induced(iv(1, 2)).unwrap();
        let vals = |role, i| t.ranking(Person { index: i, role }).unwrap().values().to_vec();
        assert_eq!(vals(Role::Woman, 1), vec![1, 2]);
        assert_eq!(vals(Role::Woman, 2), vec![2, 1]);
        assert_eq!(vals(Role::Man, 1), vec![2, 1]);
        assert_eq!(vals(Role::Man, 2), vec![1, 2]);
        let shifted = PreferenceStructure::gadget_shifted(5).unwrap();
        assert_eq!(shifted.domain(), iv(1, 11));
        assert!(shifted.prefers(Person::woman(8), 7, 8).unwrap());
    }

    #[test]
    fn induced_preserves_order() {
        let p = MallowsParams::new(0.6).unwrap();
        let s = PreferenceStructure::sample(&p, iv(1, 9), 5).unwrap();
        assert_eq!(s.induced(s.domain()).unwrap(), s);
        let sub = iv(3, 7);
        let t = s.induced(sub).unwrap();
        for i in sub.iter() {
            for who in [Person::woman(i), Person::man(i)] {
                for a in sub.iter() {
                    for b in sub.iter().filter(|&b| b != a) {
                        assert_eq!(s.prefers(who, a, b).unwrap(), t.prefers(who, a, b).unwrap());
                    }
                }
            }
        }
        assert!(matches!(s.induced(iv(0, 3)), Err(Error::NotSubinterval { .. })));
    }

    #[test]
    fn json_round_trip_and_faults() {
        let p = MallowsParams::new(0.3).unwrap();
        let s = PreferenceStructure::sample(&p, iv(-2, 4), 17).unwrap();
        let text = s.to_json(Some(0.3), Some(17));
        assert!(text.starts_with(r#"{"domain":[-2,4],"q":0.3,"seed":17,"women":[["#));
        let (back, q, seed) = parse_prefs_json("x.json", &text).unwrap();
        assert_eq!(back, s);
        assert_eq!((q, seed), (Some(0.3), Some(17)));
        assert_eq!(back.to_json(q, seed), text);

        let bad = r#"{"domain":[1,2],"women":[[1,2],[2,2]],"men":[[1,2],[1,2]]}"#;
        match parse_prefs_json("bad.json", bad) {
            Err(Error::Malformed { path, pointer, .. }) => {
                assert_eq!(path, "bad.json");
                assert_eq!(pointer, "/women/1");
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad = r#"{"domain":[1,2],"women":[[1,2],[2,1]],"men":[[1,"x"],[1,2]]}"#;
        assert!(matches!(parse_prefs_json("b", bad), Err(Error::Malformed { pointer, .. }) if pointer == "/men/0/1"));
        let bad = r#"{"domain":[1,2],"women":[[1,2]],"men":[[1,2],[1,2]]}"#;
        assert!(matches!(parse_prefs_json("b", bad), Err(Error::Malformed { pointer, .. }) if pointer == "/women"));
        assert!(matches!(parse_prefs_json("b", "{"), Err(Error::Malformed { pointer, .. }) if pointer.is_empty()));
    }

    #[test]
    fn csv_export() {
        let g = PreferenceStructure::gadget_shifted(2).unwrap();
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 10);
        assert_eq!(lines[0], "role,index,rank_of_1,rank_of_2,rank_of_3,rank_of_4,rank_of_5");
        assert_eq!(lines[5], "woman,5,1,2,3,5,4");
        assert_eq!(lines[9], "man,4,1,2,3,5,4");
    }
}
