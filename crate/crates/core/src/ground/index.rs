use super::GroundAction;

/// Fact → action cross-index. The per-action direction lives on [`GroundAction`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactIndex {
    pub pre_of: Vec<Vec<usize>>,
    pub add_of: Vec<Vec<usize>>,
    pub del_of: Vec<Vec<usize>>,
}

impl FactIndex {
    pub fn n_facts(&self) -> usize {
        self.pre_of.len()
    }

    /// True when both directions agree for every fact and action.
    pub fn is_consistent_with(&self, actions: &[GroundAction]) -> bool {
        let lists = [&self.pre_of, &self.add_of, &self.del_of];
        for (i, a) in actions.iter().enumerate() {
            for (list, facts) in lists.iter().zip([&a.pre, &a.add, &a.del]) {
                if facts.iter().any(|&f| !list[f].contains(&i)) {
                    return false;
                }
            }
        }
        lists.iter().enumerate().all(|(k, list)| {
            list.iter().enumerate().all(|(f, acts)| {
                acts.iter().all(|&i| {
                    let a = &actions[i];
                    [&a.pre, &a.add, &a.del][k].contains(&f)
                })
            })
        })
    }
}

/// Builds the cross-index over `n_facts` facts; action lists are in increasing id order.
pub fn build_fact_index(actions: &[GroundAction], n_facts: usize) -> FactIndex {
    let mut idx = FactIndex {
        pre_of: vec![Vec::new(); n_facts],
        add_of: vec![Vec::new(); n_facts],
        del_of: vec![Vec::new(); n_facts],
    };
    for (i, a) in actions.iter().enumerate() {
        for &f in &a.pre {
            idx.pre_of[f].push(i);
        }
        for &f in &a.add {
            idx.add_of[f].push(i);
        }
        for &f in &a.del {
            idx.del_of[f].push(i);
        }
    }
    idx
}
