"""A 100-pair synthetic Java corpus: ten method templates times ten entity names."""

NOUNS = ["user", "order", "item", "file", "account", "message", "task", "record", "node", "event"]

TEMPLATES = [
    ("public {N} get{N}ById(int id) {{ for ({N} x : {n}s) {{ if (x.getId() == id) {{ return x; }} }} return null; }}",
     "returns the {n} with the given id"),
    ("public int count{N}s() {{ int total = 0; for ({N} x : {n}s) {{ total++; }} return total; }}",
     "counts the number of {n}s"),
    ("public void add{N}({N} {n}) {{ if ({n} != null) {{ {n}s.add({n}); }} }}",
     "adds a {n} to the list if it is not null"),
    ("public boolean remove{N}({N} {n}) {{ return {n}s.remove({n}); }}",
     "removes the given {n} from the list"),
    ("public void clear{N}s() {{ {n}s.clear(); }}",
     "removes all {n}s"),
    ("public {N} first{N}() {{ if ({n}s.isEmpty()) {{ return null; }} return {n}s.get(0); }}",
     "returns the first {n} or null when there is none"),
    ("public boolean has{N}(String name) {{ for ({N} x : {n}s) {{ if (x.name.equals(name)) {{ return true; }} }} return false; }}",
     "checks whether a {n} with the given name exists"),
    ("public void print{N}s() {{ for ({N} x : {n}s) {{ System.out.println(x); }} }}",
     "prints every {n} to standard output"),
    ("public boolean is{N}ListEmpty() {{ return {n}s.isEmpty(); }}",
     "tells whether the {n} list is empty"),
    ("public void save{N}({N} {n}) throws IOException {{ writer.write({n}.toString()); writer.flush(); }}",
     "writes the {n} to the output stream"),
]


def toy_pairs():
    pairs = []
    for t, (code, comment) in enumerate(TEMPLATES):
        for noun in NOUNS:
            cap = noun.capitalize()
            pairs.append({
                "id": f"toy/{t:02d}/{noun}",
                "code": code.format(N=cap, n=noun),
                "comment": comment.format(n=noun),
            })
    return pairs
