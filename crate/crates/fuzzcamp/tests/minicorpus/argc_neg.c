/* argc */
static int argcount;
int main(void) { return argcount; }
