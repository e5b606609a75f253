/**
 * Draft editor for a perfect matching.
 *
 * The draft maps each left node to at most one right node and never lets
 * two left nodes share a partner: assigning a taken right node evicts the
 * previous pair.  Submission only unlocks once every node is matched, at
 * which point the draft is a permutation by construction, so a
 * non-bijective labeling is unreachable through any gesture sequence.
 */
export class MatchingEditor {
  readonly n: number;
  private leftToRight: (number | null)[];
  private selectedLeft: number | null = null;

  constructor(n: number, initial?: number[]) {
    if (n < 1) throw new Error("need at least one node");
    this.n = n;
    this.leftToRight = new Array<number | null>(n).fill(null);
    if (initial) {
      if (initial.length !== n) throw new Error("initial matching has wrong length");
      for (let i = 0; i < n; i++) this.assign(i, initial[i]);
    }
  }

  /** Current partner of each left node (null while unassigned). */
  draft(): (number | null)[] {
    return [...this.leftToRight];
  }

  selection(): number | null {
    return this.selectedLeft;
  }

  assign(left: number, right: number): void {
    this.checkIndex(left);
    this.checkIndex(right);
    const holder = this.leftToRight.indexOf(right);
    if (holder !== -1 && holder !== left) {
      this.leftToRight[holder] = null; // evict the conflicting pair
    }
    this.leftToRight[left] = right;
  }

  unassign(left: number): void {
    this.checkIndex(left);
    this.leftToRight[left] = null;
  }

  /** Swap the partners of two left nodes (both must be assigned). */
  swap(a: number, b: number): void {
    this.checkIndex(a);
    this.checkIndex(b);
    const ra = this.leftToRight[a];
    const rb = this.leftToRight[b];
    if (ra === null || rb === null) throw new Error("swap needs two assigned nodes");
    this.leftToRight[a] = rb;
    this.leftToRight[b] = ra;
  }

  /** Click protocol: left node first, then its right partner. */
  clickLeft(i: number): void {
    this.checkIndex(i);
    this.selectedLeft = this.selectedLeft === i ? null : i;
  }

  clickRight(j: number): void {
    this.checkIndex(j);
    if (this.selectedLeft === null) return;
    this.assign(this.selectedLeft, j);
    this.selectedLeft = null;
  }

  isComplete(): boolean {
    return this.leftToRight.every((v) => v !== null);
  }

  /** The finished permutation; only callable when the draft is complete. */
  toPermutation(): number[] {
    if (!this.isComplete()) throw new Error("draft is incomplete");
    return this.leftToRight.map((v) => v as number);
  }

  /** Internal consistency: assigned partners are pairwise distinct. */
  isInjective(): boolean {
    const taken = new Set<number>();
    for (const v of this.leftToRight) {
      if (v === null) continue;
      if (taken.has(v)) return false;
      taken.add(v);
    }
    return true;
  }

  private checkIndex(i: number): void {
    if (!Number.isInteger(i) || i < 0 || i >= this.n) {
      throw new Error(`node index ${i} out of range`);
    }
  }
}
