"""Reference-based scoring: alignment, PER, and subset error rates."""

from xppgpca.refmetrics import align, per, subset_error_rate

ref = "d ə v ɛi v ə r l ɪ x t s t ɪ l".split()
hyp = "d ə v ɛi ə l ɪ x s t ɑ l".split()

print("reference: ", " ".join(ref))
print("hypothesis:", " ".join(hyp))

print("\nalignment:")
for op in align(ref, hyp):
    r = ref[op.ref_index] if op.ref_index is not None else "·"
    h = hyp[op.hyp_index] if op.hyp_index is not None else "·"
    print(f"   {op.kind:<10} {r:>3} -> {h}")

print(f"\nphoneme error rate      {per(ref, hyp):.3f}")

# oral-cancer speech particularly degrades /s/, /k/, /t/
skt = {"s", "k", "t"}
consonants = {"d", "v", "r", "l", "x", "t", "s"}
print(f"/s k t/ error rate      {subset_error_rate(ref, hyp, skt):.3f}")
print(f"consonant error rate    {subset_error_rate(ref, hyp, consonants):.3f}")

# a second hypothesis that only drops vowels: subset rates stay clean
hyp2 = [p for p in ref if p not in ("ə", "ɪ", "ɛi")]
print(f"\nvowel-dropping hypothesis: PER {per(ref, hyp2):.3f}, "
      f"/s k t/ rate {subset_error_rate(ref, hyp2, skt):.3f}")
