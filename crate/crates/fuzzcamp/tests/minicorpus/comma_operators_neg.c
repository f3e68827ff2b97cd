static int add(int a, int b) { return a + b; }
int main(void) { int v[2] = {4, 5}; return add(v[0], v[1]); }
