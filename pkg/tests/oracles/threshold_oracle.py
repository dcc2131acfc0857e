"""Independent big-integer oracle for the r=2, theta=1/2 iteration threshold.

Computes (8 * (19!)^24)^2 from the prime factorization of 19! (Legendre's
formula) without calling math.factorial or the package.  Run as a script to
print the digit count, bit length and a SHA-256 of the decimal expansion.
"""

import hashlib
import sys


def primes_upto(n):
    sieve = [True] * (n + 1)
    sieve[0:2] = [False, False]
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = [False] * len(sieve[p * p::p])
    return [p for p, ok in enumerate(sieve) if ok]


def legendre(n, p):
    """Exponent of p in n!."""
    e, q = 0, p
    while q <= n:
        e += n // q
        q *= p
    return e


def factorial_exponents(n):
    return {p: legendre(n, p) for p in primes_upto(n)}


def threshold_r2_half():
    # (1 - 1/2)^3 = 1/8, so the second term is 8 * (19!)^24 exactly; it exceeds 18!
    exps = {p: 24 * e for p, e in factorial_exponents(19).items()}
    exps[2] += 3
    inner = 1
    for p, e in exps.items():
        inner *= p ** e
    return inner ** 2


def digest(value):
    return hashlib.sha256(str(value).encode()).hexdigest()


if __name__ == "__main__":
    v = threshold_r2_half()
    sys.stdout.write(f"digits {len(str(v))}\nbits {v.bit_length()}\nsha256 {digest(v)}\n")
