"""Orders, pruning and branch counts on a small hand-made tree."""

from hortonlab import assign_orders, canonical_form, horton_statistics, parse_tree, prune

t = parse_tree("(((((a,b),c),((d,e),f)),((g,h),i)),j);")

# order of every vertex, preorder
print(assign_orders(t).order)

# prune until nothing is left; the number of steps is the tree order
step = t
while not step.is_empty:
    print(canonical_form(step))
    step = prune(step)

stats = horton_statistics(t)
print("order", stats.order)
print("branches", stats.branch_counts)
print("side-branches", stats.side_branch_counts)
