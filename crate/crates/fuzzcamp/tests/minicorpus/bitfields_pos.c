struct flags { unsigned int ready : 1; unsigned int mode : 3; };
int main(void) { struct flags f; f.ready = 1; return f.mode; }
