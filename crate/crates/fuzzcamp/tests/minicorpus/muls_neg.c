int main(void) { int v = 5; int *p = &v; return *p; }
