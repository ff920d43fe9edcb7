/// Disjoint-set forest over graph node indices with path halving and union
/// by size. Only slots passed to `make` are meaningful; the rest are left
/// untouched so a large forest can be reused for small subsets.
#[derive(Clone, Debug, Default)]
pub(crate) struct Dsu {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl Dsu {
    pub fn with_len(n: usize) -> Self {
        Dsu {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn ensure_len(&mut self, n: usize) {
        if self.parent.len() < n {
            let start = self.parent.len() as u32;
            self.parent.extend(start..n as u32);
            self.size.resize(n, 1);
        }
    }

    #[inline]
    pub fn make(&mut self, x: usize) {
        self.parent[x] = x as u32;
        self.size[x] = 1;
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    /// Joins two distinct roots and returns `(new_root, absorbed_root)`.
    pub fn link_roots(&mut self, a: usize, b: usize) -> (usize, usize) {
        debug_assert_ne!(a, b);
        let (big, small) = if self.size[a] >= self.size[b] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[small] = big as u32;
        self.size[big] += self.size[small];
        (big, small)
    }

    #[inline]
    pub fn size_of_root(&self, r: usize) -> u32 {
        self.size[r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joins_and_sizes() {
        let mut d = Dsu::with_len(6);
        let (r, _) = d.link_roots(0, 1);
        let r2 = d.find(2);
        let (r, _) = d.link_roots(r, r2);
        assert_eq!(d.size_of_root(r), 3);
        assert_eq!(d.find(0), d.find(2));
        assert_ne!(d.find(0), d.find(5));
        d.make(1);
        assert_eq!(d.find(1), 1);
    }
}
