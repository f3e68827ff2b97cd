static int inlined_count; /* inline */
int main(void) { inlined_count = 1; return inlined_count; }
