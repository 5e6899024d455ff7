"""Tokenize a snippet, find the renameable identifiers, and build the branch inputs.

Run:  python demos/01_tokens_and_views.py
"""

from cream.lexer import classify_identifiers, render, tokenize
from cream.rng import Rng
from cream.views import abstract_code, build_views, rename_random

source = """\
int total = 0;
for (int i = 0; i < n; i = i + 1) {
  total = total + prices[i];   // running sum
}
printf("%d\\n", total);
"""

toks = tokenize(source)
ids = classify_identifiers(toks)

# %% every token with its kind; call heads such as printf are not user identifiers
for i, tok in enumerate(toks):
    mark = "*" if i in ids else " "
    print(f"{mark} {i:2d} {tok.kind.value:<11} {tok.text}")

# %% the three branch inputs
views = build_views(toks, ids)
print("\ncombined (k):", " ".join(views.k_tokens))
print("non-naming (f):", " ".join(views.f_tokens))
print("naming (t):", " ".join(views.t_tokens))

# %% placeholder abstraction keeps comments and layout
print("\n" + render(abstract_code(toks, ids)))

# %% a random consistent renaming, as used for the transformed test set
renamed, mapping = rename_random(toks, ids, ["acc", "k", "len", "buf", "tmp"], Rng(3))
print(mapping)
print(render(renamed))
