"""Generate sample networks, queries and gadget inputs for trying the CLI."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from bnmap.bench.generator import SuiteSpec, gen_random_instance
from bnmap.core.reader import serialize_network, serialize_query
from bnmap.gadgets.artifact import write_artifact
from bnmap.gadgets.maxsat import Max2SatInstance, max2sat_to_naivebayes
from bnmap.gadgets.partition import PartitionInstance, partition_to_hmm, partition_to_polytree

CHAIN_NETWORK = """bnm 1
# two-node chain A -> B
var A 2
var B 2
parents B A
cpt A
3/10 7/10
cpt B
9/10 1/10
1/5 4/5
"""

CHAIN_QUERY = "map A\nevidence B=0\n"

PARTITION_VALUES = "# splits as 1 + 4 = 2 + 3\n1 2 3 4\n"

MAX2SAT_CNF = """c x1 or x2, not x1 or x2, not x2 or x3
p cnf 3 3
1 2 0
-1 2 0
-2 3 0
"""


def generate_samples(out_dir: Path) -> list:
    """Write the sample files into ``out_dir`` and return their paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    for name, text in (
        ("chain.bnm", CHAIN_NETWORK),
        ("chain.qry", CHAIN_QUERY),
        ("partition.txt", PARTITION_VALUES),
        ("max2sat.cnf", MAX2SAT_CNF),
    ):
        path = out_dir / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    partition = PartitionInstance.from_values([1, 2, 3, 4])
    clauses = [((1, True), (2, True)), ((1, False), (2, True)), ((2, False), (3, True))]
    for artifact in (
        partition_to_polytree(partition),
        partition_to_hmm(partition),
        max2sat_to_naivebayes(Max2SatInstance.from_clauses(3, clauses)),
    ):
        written.extend(write_artifact(artifact, out_dir / "gadgets"))

    spec = SuiteSpec(family="rand-tw2", base_size=12, max_card=3, seed=42, ss_bucket="10-20")
    net, query = gen_random_instance(spec, 0)
    for suffix, text in ((".bnm", serialize_network(net)), (".qry", serialize_query(query, net))):
        path = out_dir / f"random-tw2{suffix}"
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


def main():
    """Generate and save sample instances."""
    print("Generating sample bnmap instances...")
    out_dir = Path(__file__).parent / "samples"
    written = generate_samples(out_dir)
    print(f"Sample instances generated in {out_dir}")
    for path in written:
        print(f"   - {path.relative_to(out_dir)}")
    print("\nTry:")
    print(f"   bnmap solve --net {out_dir / 'chain.bnm'} --query {out_dir / 'chain.qry'}")


if __name__ == '__main__':
    main()
