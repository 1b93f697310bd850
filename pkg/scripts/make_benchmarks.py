"""Write the bundled benchmark suite.

Expected normal forms are computed here with ordinary Python arithmetic and
list operations, independently of the rewrite engines.
"""

import pathlib
import sys

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "setrewrite" / "benchmarks"

PEANO = "0:0 s:1"


def nat(n: int) -> str:
    return "s(" * n + "0" + ")" * n


def nat_list(xs) -> str:
    out = "nil"
    for x in reversed(xs):
        out = f"cons({nat(x)},{out})"
    return out


FIB = f"""# Fibonacci on Peano numerals
symbols: {PEANO} plus:2 fib:1
vars: x y
rules:
plus(0,y) -> y
plus(s(x),y) -> s(plus(x,y))
fib(0) -> 0
fib(s(0)) -> s(0)
fib(s(s(x))) -> plus(fib(s(x)),fib(x))
"""

SIEVE = f"""# Sieve of Eratosthenes over a Peano list 2..n
symbols: {PEANO} nil:0 cons:2 true:0 false:0 if:3 lt:2 minus:2 mod:2 ifmod:3 iszero:1 upto:2 ifupto:3 sieve:1 filter:2
vars: x y p n xs ys
rules:
if(true,x,y) -> x
if(false,x,y) -> y
lt(x,0) -> false
lt(0,s(y)) -> true
lt(s(x),s(y)) -> lt(x,y)
minus(x,0) -> x
minus(s(x),s(y)) -> minus(x,y)
mod(x,y) -> ifmod(lt(x,y),x,y)
ifmod(true,x,y) -> x
ifmod(false,x,y) -> mod(minus(x,y),y)
iszero(0) -> true
iszero(s(x)) -> false
upto(x,n) -> ifupto(lt(n,x),x,n)
ifupto(true,x,n) -> nil
ifupto(false,x,n) -> cons(x,upto(s(x),n))
sieve(nil) -> nil
sieve(cons(x,xs)) -> cons(x,sieve(filter(x,xs)))
filter(p,nil) -> nil
filter(p,cons(y,ys)) -> if(iszero(mod(y,p)),filter(p,ys),cons(y,filter(p,ys)))
"""

MERGESORT = f"""# Merge sort on Peano lists
symbols: {PEANO} nil:0 cons:2 true:0 false:0 le:2 msort:1 evens:1 odds:1 merge:2 ifm:3
vars: x y xs ys zs
rules:
le(0,y) -> true
le(s(x),0) -> false
le(s(x),s(y)) -> le(x,y)
evens(nil) -> nil
evens(cons(x,xs)) -> cons(x,odds(xs))
odds(nil) -> nil
odds(cons(x,xs)) -> evens(xs)
merge(nil,ys) -> ys
merge(cons(x,xs),nil) -> cons(x,xs)
merge(cons(x,xs),cons(y,ys)) -> ifm(le(x,y),cons(x,xs),cons(y,ys))
ifm(true,cons(x,xs),ys) -> cons(x,merge(xs,ys))
ifm(false,xs,cons(y,ys)) -> cons(y,merge(xs,ys))
msort(nil) -> nil
msort(cons(x,nil)) -> cons(x,nil)
msort(cons(x,cons(y,zs))) -> merge(msort(evens(cons(x,cons(y,zs)))),msort(odds(cons(x,cons(y,zs)))))
"""

BUBBLESORT = f"""# Bubble sort on Peano lists: each pass bubbles the minimum to the front
symbols: {PEANO} nil:0 cons:2 true:0 false:0 le:2 bsort:1 pass:1 bm:2 swap:4 place:1
vars: x y m xs ys rest
rules:
le(0,y) -> true
le(s(x),0) -> false
le(s(x),s(y)) -> le(x,y)
bsort(nil) -> nil
bsort(cons(x,xs)) -> place(pass(cons(x,xs)))
pass(cons(x,nil)) -> cons(x,nil)
pass(cons(x,cons(y,ys))) -> bm(pass(cons(y,ys)),x)
bm(cons(m,rest),x) -> swap(le(x,m),x,m,rest)
swap(true,x,m,rest) -> cons(x,cons(m,rest))
swap(false,x,m,rest) -> cons(m,cons(x,rest))
place(cons(m,rest)) -> cons(m,bsort(rest))
"""


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def primes(n):
    return [k for k in range(2, n + 1) if all(k % d for d in range(2, k))]


def scrambled(n, step, shift):
    return [(i * step + shift) % n for i in range(n)]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    ms = scrambled(32, 13, 5)
    bs = scrambled(50, 17, 3)
    suite = {
        "fib20": (FIB, f"fib({nat(20)})", nat(fib(20))),
        "sieve100": (SIEVE, f"sieve(upto({nat(2)},{nat(100)}))", nat_list(primes(100))),
        "mergesort32": (MERGESORT, f"msort({nat_list(ms)})", nat_list(sorted(ms))),
        "bubblesort50": (BUBBLESORT, f"bsort({nat_list(bs)})", nat_list(sorted(bs))),
    }
    for name, (trs, term, nf) in suite.items():
        (OUT / f"{name}.trs").write_text(trs)
        (OUT / f"{name}.term").write_text(term + "\n")
        (OUT / f"{name}.nf").write_text(nf + "\n")
        print(f"wrote {name}", file=sys.stderr)


if __name__ == "__main__":
    main()
