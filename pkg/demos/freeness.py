"""Ping-pong certification of pairs of independent walks on F_2, as n grows.

Run: python3 demos/freeness.py
"""
import math

from hypconc.hypspace import Word
from hypconc.pingpong import certify_free, find_relation, tits_experiment
from hypconc.walk import FiniteMeasure

W = Word.parse
print(certify_free(W("a"), W("b")))
print("a, A ->", certify_free(W("a"), W("A")).verdict, find_relation(W("a"), W("A")))
print("ab, abab ->", find_relation(W("ab"), W("abab")))

mu = FiniteMeasure.srw(2)
print("\n   n  certified   at D_n")
for n in (5, 10, 20, 50, 100, 200):
    rep = tits_experiment(mu, n, 2000, seed=0, ell=0.5, theory=False, check_words=False)
    print(f"{n:>4}  {rep.frequency:.4f}     {rep.certified_at_Dn / rep.trials:.4f}")

rep = tits_experiment(mu, 200, 500, seed=1, ell=0.5)
print("\ntheory at n=200:", rep.bounds.prop.value, rep.bounds.thm.value, rep.notes[-1])
