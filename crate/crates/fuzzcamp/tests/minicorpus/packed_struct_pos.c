struct __attribute__((packed)) tight { char c; int v; };
int main(void) { struct tight t; t.c = 1; return t.v; }
