// Book chapters compile as doc-tests; filled in once the book exists.
